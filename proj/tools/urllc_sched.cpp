// Command-line front end: single-instance solves, Monte Carlo sweeps,
// SCA-vs-exhaustive comparisons and rate calculations.
//
// Exit codes: 0 ok, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "urllc/baselines.hpp"
#include "urllc/fbl_rate.hpp"
#include "urllc/harness.hpp"
#include "urllc/instance_io.hpp"
#include "urllc/sca_scheduler.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::uint64_t seed = 1;
  int users = 8;
  int antennas = 4;
  double snr_db = 10.0;
  std::int64_t blocklength = 128;
  double epsilon = 1e-6;
  std::int64_t data_bits = 256;
  double mu = 0.05;
  double delta = 1e-3;
  bool no_tuning = false;

  void attach(CLI::App* app) {
    app->add_option("--seed", seed, "Channel seed (master seed for sweeps)");
    app->add_option("--users", users, "Number of candidate users K")->check(CLI::PositiveNumber);
    app->add_option("--antennas", antennas, "Base-station antennas Nt")->check(CLI::PositiveNumber);
    app->add_option("--snr-db", snr_db, "Transmit SNR P / sigma^2 in dB");
    app->add_option("--blocklength", blocklength, "Blocklength n")->check(CLI::PositiveNumber);
    app->add_option("--epsilon", epsilon, "Decoding error probability")->check(CLI::Range(0.0, 0.5));
    app->add_option("--data-bits", data_bits, "Payload D in bits")->check(CLI::PositiveNumber);
    app->add_option("--mu", mu, "Penalty weight")->check(CLI::NonNegativeNumber);
    app->add_option("--delta", delta, "Relative objective stopping threshold")->check(CLI::Range(0.0, 1.0));
    app->add_flag("--no-tuning", no_tuning, "Disable the restart tuning pass");
  }

  urllc::NetworkConfig network() const {
    urllc::NetworkConfig c;
    c.num_users = users;
    c.num_antennas = antennas;
    c.snr_db = snr_db;
    return c;
  }
  urllc::FblParams fbl() const {
    try {
      return urllc::FblParams::make(epsilon, blocklength, data_bits);
    } catch (const std::domain_error& e) {
      throw UsageError(e.what());
    }
  }
  urllc::ScaConfig sca() const {
    urllc::ScaConfig c;
    c.mu = mu;
    c.delta = delta;
    c.tuning_enabled = !no_tuning;
    return c;
  }
};

std::vector<urllc::Method> parse_methods(const std::string& list) {
  std::vector<urllc::Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(urllc::parse_method(item));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("--methods needs at least one method");
  return out;
}

void print_solution(const urllc::SchedulingSolution& s, const urllc::FblParams& params, double budget) {
  std::printf("status: %s\n", urllc::to_string(s.status));
  std::printf("scheduled: %d user(s) {", s.cardinality());
  for (std::size_t i = 0; i < s.scheduled_set.size(); ++i) {
    std::printf("%s%d", i ? ", " : "", s.scheduled_set[i]);
  }
  std::printf("}\n");
  std::printf("rate target: %.6f nats/use\n", params.rate_target_nats);
  for (int k : s.scheduled_set) {
    std::printf("  user %d: sinr %.6f  rate %.6f nats  power %.6f\n", k, s.per_user_sinr[k],
                s.per_user_rate_nats[k], s.weights[k].squaredNorm());
  }
  std::printf("total power: %.6f of %.6f\n", s.total_power, budget);
  std::printf("iterations: %d  tuning rounds: %d\n", s.iterations_used, s.tuning_rounds_used);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Joint user scheduling and beamforming under finite-blocklength rate constraints"};
  app.require_subcommand(1);

  // solve
  CommonFlags solve_flags;
  std::string instance_path, save_path, trace_path, solve_method = "sca";
  auto* solve = app.add_subcommand("solve", "Schedule one instance (drawn from --seed or read from --instance)");
  solve_flags.attach(solve);
  solve->add_option("--instance", instance_path, "Instance file to load instead of drawing");
  solve->add_option("--save-instance", save_path, "Write the instance used to this file");
  solve->add_option("--trace", trace_path, "Write the per-iteration trace as CSV");
  solve->add_option("--method", solve_method, "sca, shannon or es")
      ->check(CLI::IsMember({"sca", "shannon", "es"}));

  // sweep
  CommonFlags sweep_flags;
  std::string config_path, axis = "num_users", values, methods, out_path;
  int trials = 100, threads = 0;
  bool timing = false;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep along one axis, CSV output");
  sweep_flags.attach(sweep);
  sweep->add_option("--config", config_path, "JSON sweep configuration (flags are ignored when given)");
  sweep->add_option("--axis", axis, "num_users, blocklength or epsilon")
      ->check(CLI::IsMember({"num_users", "users", "K", "blocklength", "n", "epsilon"}));
  sweep->add_option("--values", values, "Comma-separated axis values (default grid otherwise)");
  sweep->add_option("--trials", trials, "Trials per axis value")->check(CLI::PositiveNumber);
  sweep->add_option("--methods", methods, "Comma list of sca_tuned,sca_plain,es,shannon");
  sweep->add_option("--out", out_path, "CSV output path (stdout when omitted)");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  sweep->add_flag("--timing", timing, "Append a mean_wall_ms column");

  // compare
  CommonFlags cmp_flags;
  cmp_flags.users = 6;
  cmp_flags.antennas = 2;
  int cmp_trials = 10;
  auto* compare = app.add_subcommand("compare", "SCA versus exhaustive search on a small-K batch");
  cmp_flags.attach(compare);
  compare->add_option("--trials", cmp_trials, "Number of instances")->check(CLI::PositiveNumber);

  // rate-tools
  CommonFlags rate_flags;
  std::vector<double> gammas;
  auto* rate_tools = app.add_subcommand("rate-tools", "Print finite-blocklength rate quantities");
  rate_tools->add_option("--epsilon", rate_flags.epsilon, "Decoding error probability")
      ->check(CLI::Range(0.0, 0.5));
  rate_tools->add_option("--blocklength", rate_flags.blocklength, "Blocklength n")->check(CLI::PositiveNumber);
  rate_tools->add_option("--data-bits", rate_flags.data_bits, "Payload D in bits")->check(CLI::PositiveNumber);
  rate_tools->add_option("--gamma", gammas, "SINR values at which to print R and V");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*rate_tools) {
    const auto p = rate_flags.fbl();
    std::printf("epsilon %.6g  n %lld  D %lld\n", p.epsilon, static_cast<long long>(p.blocklength_n),
                static_cast<long long>(p.data_bits_D));
    std::printf("theta: %.10g\n", p.theta);
    std::printf("rate target r: %.10g nats/use\n", p.rate_target_nats);
    std::printf("gamma_tilde (finite blocklength): %.10g\n", urllc::min_sinr(p));
    std::printf("gamma_tilde* (Shannon): %.10g\n", urllc::shannon_min_sinr(p));
    for (double g : gammas) {
      if (g < 0) throw UsageError("--gamma must be non-negative");
      std::printf("gamma %.6g: R %.10g nats  V %.10g\n", g, urllc::rate(g, p), urllc::v_of(g));
    }
    return 0;
  }

  if (*solve) {
    urllc::Instance inst;
    if (!instance_path.empty()) {
      inst = urllc::load_instance(instance_path);
    } else {
      inst = urllc::make_instance(solve_flags.network(), solve_flags.seed);
    }
    if (!save_path.empty()) urllc::save_instance(save_path, inst);
    const auto params = solve_flags.fbl();
    const double budget = inst.config.power_budget();
    const auto cfg = solve_flags.sca();

    std::ofstream trace_file;
    urllc::TraceSink trace;
    if (!trace_path.empty()) {
      trace_file.open(trace_path);
      if (!trace_file) throw std::runtime_error("cannot open " + trace_path);
      trace = urllc::csv_trace(trace_file);
    }
    std::printf("K %d  Nt %d  P %.6g  gamma_tilde %.6g\n", inst.realization.num_users(),
                inst.realization.num_antennas(), budget, urllc::min_sinr(params));
    if (solve_method == "sca") {
      print_solution(urllc::run_with_tuning(inst.realization, params, budget, cfg, std::nullopt, trace),
                     params, budget);
    } else if (solve_method == "shannon") {
      const auto r = urllc::shannon_schedule(inst.realization, params, budget, cfg);
      std::printf("raw (Shannon thresholds) cardinality: %d\n", r.raw_cardinality());
      print_solution(r.verified, params, budget);
    } else {
      const auto targets = urllc::fbl_targets(params, inst.realization.num_users());
      const auto r = urllc::exhaustive_search(inst.realization, targets, budget);
      auto s = urllc::verified_solution(inst.realization, params, r.best_set, r.weights);
      s.status = urllc::RunStatus::converged;
      std::printf("subsets checked: %ld\n", r.subsets_checked);
      print_solution(s, params, budget);
    }
    return 0;
  }

  if (*sweep) {
    urllc::SweepConfig cfg;
    try {
      if (!config_path.empty()) {
        cfg = urllc::load_sweep_config(config_path);
      } else {
        cfg.axis = urllc::parse_axis(axis);
        cfg.network = sweep_flags.network();
        cfg.epsilon = sweep_flags.epsilon;
        cfg.blocklength = sweep_flags.blocklength;
        cfg.data_bits = sweep_flags.data_bits;
        cfg.sca = sweep_flags.sca();
        cfg.trials = trials;
        cfg.master_seed = sweep_flags.seed;
        cfg.threads = threads;
        if (!methods.empty()) cfg.methods = parse_methods(methods);
        if (sweep_flags.no_tuning) {
          std::erase(cfg.methods, urllc::Method::sca_tuned);
          if (cfg.methods.empty()) throw UsageError("--no-tuning leaves no method to run");
        }
        if (values.empty()) {
          cfg.axis_values = urllc::default_axis_values(cfg.axis);
        } else {
          std::stringstream ss(values);
          std::string item;
          while (std::getline(ss, item, ',')) {
            if (!item.empty()) cfg.axis_values.push_back(std::stod(item));
          }
        }
        cfg.validate();
      }
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto result = urllc::run_sweep(cfg);
    if (out_path.empty()) {
      urllc::write_csv(std::cout, result, timing);
    } else {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot open " + out_path);
      urllc::write_csv(out, result, timing);
    }
    return 0;
  }

  if (*compare) {
    const auto params = cmp_flags.fbl();
    const auto net = cmp_flags.network();
    const double budget = net.power_budget();
    auto cfg = cmp_flags.sca();
    const auto targets = urllc::fbl_targets(params, net.num_users);
    std::printf("trial,seed,sca_tuned,sca_plain,es\n");
    double sum_t = 0, sum_p = 0, sum_e = 0;
    for (int t = 0; t < cmp_trials; ++t) {
      const auto seed = urllc::trial_seed(cmp_flags.seed, 0, t);
      const auto r = urllc::draw_channels(net, seed);
      cfg.tuning_enabled = true;
      const int tuned = urllc::run_with_tuning(r, params, budget, cfg).cardinality();
      const int plain = urllc::run(r, params, budget, cfg).cardinality();
      const int es = static_cast<int>(urllc::exhaustive_search(r, targets, budget).best_set.size());
      std::printf("%d,%llu,%d,%d,%d\n", t, static_cast<unsigned long long>(seed), tuned, plain, es);
      sum_t += tuned;
      sum_p += plain;
      sum_e += es;
    }
    std::printf("mean,,%.4f,%.4f,%.4f\n", sum_t / cmp_trials, sum_p / cmp_trials, sum_e / cmp_trials);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
