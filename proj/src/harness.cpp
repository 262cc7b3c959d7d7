#include "urllc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace urllc {

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::num_users: return "num_users";
    case SweepAxis::blocklength: return "blocklength";
    case SweepAxis::epsilon: return "epsilon";
  }
  return "unknown";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::sca_tuned: return "sca_tuned";
    case Method::sca_plain: return "sca_plain";
    case Method::es: return "es";
    case Method::shannon: return "shannon";
  }
  return "unknown";
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "num_users" || s == "users" || s == "K") return SweepAxis::num_users;
  if (s == "blocklength" || s == "n") return SweepAxis::blocklength;
  if (s == "epsilon") return SweepAxis::epsilon;
  throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

Method parse_method(const std::string& s) {
  if (s == "sca_tuned") return Method::sca_tuned;
  if (s == "sca_plain") return Method::sca_plain;
  if (s == "es") return Method::es;
  if (s == "shannon") return Method::shannon;
  throw std::invalid_argument("unknown method '" + s + "'");
}

std::vector<double> default_axis_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::num_users: return {4, 6, 8, 10, 12};
    case SweepAxis::blocklength: return {64, 128, 256, 512};
    case SweepAxis::epsilon: return {1e-9, 1e-7, 1e-6, 1e-5, 1e-3};
  }
  return {};
}

std::uint64_t trial_seed(std::uint64_t master_seed, int /*axis_index*/, int trial) {
  return master_seed + static_cast<std::uint64_t>(trial);
}

namespace {

bool is_positive_integer(double v) { return v >= 1.0 && v == std::floor(v) && v < 1e9; }

}  // namespace

void SweepConfig::validate() {
  if (axis_values.empty()) throw std::invalid_argument("sweep needs at least one axis value");
  std::sort(axis_values.begin(), axis_values.end());
  if (std::adjacent_find(axis_values.begin(), axis_values.end()) != axis_values.end()) {
    throw std::invalid_argument("sweep axis values must be distinct");
  }
  for (double v : axis_values) {
    switch (axis) {
      case SweepAxis::num_users:
      case SweepAxis::blocklength:
        if (!is_positive_integer(v)) throw std::invalid_argument("axis value must be a positive integer");
        break;
      case SweepAxis::epsilon:
        if (!(v > 0.0 && v <= 0.5)) throw std::invalid_argument("epsilon values must lie in (0, 0.5]");
        break;
    }
  }
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  if (methods.empty()) throw std::invalid_argument("at least one method is required");
  if (threads < 0) throw std::invalid_argument("threads must be non-negative");
  sca.validate();
  for (double v : axis_values) {
    network_at(v).validate();
    (void)fbl_at(v);
  }
  if (std::find(methods.begin(), methods.end(), Method::es) != methods.end()) {
    const int max_k = axis == SweepAxis::num_users ? static_cast<int>(axis_values.back()) : network.num_users;
    if (max_k > es_user_cap) {
      throw std::invalid_argument("exhaustive search requested with K = " + std::to_string(max_k) +
                                  " above its cap of " + std::to_string(es_user_cap));
    }
  }
}

NetworkConfig SweepConfig::network_at(double axis_value) const {
  NetworkConfig c = network;
  if (axis == SweepAxis::num_users) c.num_users = static_cast<int>(axis_value);
  return c;
}

FblParams SweepConfig::fbl_at(double axis_value) const {
  double eps = epsilon;
  std::int64_t n = blocklength;
  if (axis == SweepAxis::epsilon) eps = axis_value;
  if (axis == SweepAxis::blocklength) n = static_cast<std::int64_t>(axis_value);
  return FblParams::make(eps, n, data_bits);
}

void run_trial(const SweepConfig& config, const ChannelRealization& realization, double axis_value,
               int axis_index, int trial, std::vector<TrialRecord>& out) {
  const FblParams params = config.fbl_at(axis_value);
  const double power = config.network_at(axis_value).power_budget();
  using clock = std::chrono::steady_clock;

  auto record = [&](const char* name, int card, int iters, clock::time_point start) {
    const double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    out.push_back({axis_index, trial, name, card, iters, ms});
  };

  for (Method m : config.methods) {
    const auto start = clock::now();
    switch (m) {
      case Method::sca_tuned: {
        ScaConfig c = config.sca;
        c.tuning_enabled = true;
        const auto s = run_with_tuning(realization, params, power, c);
        record("sca_tuned", s.cardinality(), s.iterations_used, start);
        break;
      }
      case Method::sca_plain: {
        const auto s = run(realization, params, power, config.sca);
        record("sca_plain", s.cardinality(), s.iterations_used, start);
        break;
      }
      case Method::es: {
        const auto targets = fbl_targets(params, realization.num_users());
        const auto r = exhaustive_search(realization, targets, power, config.es_user_cap, config.sca.solver);
        record("es", static_cast<int>(r.best_set.size()), static_cast<int>(r.subsets_checked), start);
        break;
      }
      case Method::shannon: {
        const auto r = shannon_schedule(realization, params, power, config.sca);
        record("shannon_verified", r.verified_cardinality(), r.verified.iterations_used, start);
        TrialRecord raw = out.back();
        raw.method = "shannon_raw";
        raw.cardinality = r.raw_cardinality();
        out.push_back(std::move(raw));
        break;
      }
    }
  }
}

namespace {

int method_rank(const std::string& m) {
  static const char* order[] = {"sca_tuned", "sca_plain", "es", "shannon_verified", "shannon_raw"};
  for (int i = 0; i < 5; ++i) {
    if (m == order[i]) return i;
  }
  return 5;
}

}  // namespace

std::vector<SweepRow> aggregate(const std::vector<TrialRecord>& trials, const std::vector<double>& axis_values) {
  std::vector<SweepRow> rows;
  for (std::size_t a = 0; a < axis_values.size(); ++a) {
    std::vector<std::string> methods;
    for (const auto& t : trials) {
      if (t.axis_index == static_cast<int>(a) &&
          std::find(methods.begin(), methods.end(), t.method) == methods.end()) {
        methods.push_back(t.method);
      }
    }
    std::stable_sort(methods.begin(), methods.end(),
                     [](const auto& x, const auto& y) { return method_rank(x) < method_rank(y); });
    for (const auto& m : methods) {
      SweepRow row;
      row.axis_value = axis_values[a];
      row.method = m;
      double sum = 0.0, iters = 0.0, wall = 0.0;
      int count = 0;
      for (const auto& t : trials) {
        if (t.axis_index != static_cast<int>(a) || t.method != m) continue;
        sum += t.cardinality;
        iters += t.iterations;
        wall += t.wall_ms;
        row.infeasible_trials += t.cardinality == 0 ? 1 : 0;
        ++count;
      }
      row.mean_cardinality = sum / count;
      row.mean_iters = iters / count;
      row.mean_wall_ms = wall / count;
      double ss = 0.0;
      for (const auto& t : trials) {
        if (t.axis_index != static_cast<int>(a) || t.method != m) continue;
        ss += (t.cardinality - row.mean_cardinality) * (t.cardinality - row.mean_cardinality);
      }
      row.stderr_cardinality = count > 1 ? std::sqrt(ss / (count - 1) / count) : 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

SweepResult run_sweep(SweepConfig config) {
  config.validate();
  const int points = static_cast<int>(config.axis_values.size());
  const int jobs = points * config.trials;
  std::vector<std::vector<TrialRecord>> per_job(jobs);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int j = next++; j < jobs; j = next++) {
      const int a = j / config.trials;
      const int t = j % config.trials;
      const double v = config.axis_values[a];
      const auto realization = draw_channels(config.network_at(v), trial_seed(config.master_seed, a, t));
      run_trial(config, realization, v, a, t, per_job[j]);
    }
  };
  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  SweepResult res;
  res.axis = config.axis;
  for (auto& v : per_job) {
    for (auto& r : v) res.trials.push_back(std::move(r));
  }
  std::stable_sort(res.trials.begin(), res.trials.end(), [](const TrialRecord& x, const TrialRecord& y) {
    if (x.axis_index != y.axis_index) return x.axis_index < y.axis_index;
    if (x.trial != y.trial) return x.trial < y.trial;
    return method_rank(x.method) < method_rank(y.method);
  });
  res.rows = aggregate(res.trials, config.axis_values);
  return res;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("malformed number in CSV: " + s);
  return v;
}

}  // namespace

void write_csv(std::ostream& out, const SweepResult& result, bool with_timing) {
  out << kCsvHeader << (with_timing ? ",mean_wall_ms" : "") << '\n';
  for (const auto& r : result.rows) {
    out << fmt(r.axis_value) << ',' << r.method << ',' << fmt(r.mean_cardinality) << ','
        << fmt(r.stderr_cardinality) << ',' << fmt(r.mean_iters) << ',' << r.infeasible_trials;
    if (with_timing) out << ',' << fmt(r.mean_wall_ms);
    out << '\n';
  }
}

std::vector<SweepRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool timing = line == std::string(kCsvHeader) + ",mean_wall_ms";
  if (line != kCsvHeader && !timing) throw std::runtime_error("unexpected CSV header: " + line);
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != (timing ? 7u : 6u)) throw std::runtime_error("wrong column count in CSV row");
    SweepRow r;
    r.axis_value = parse_double(cells[0]);
    r.method = cells[1];
    r.mean_cardinality = parse_double(cells[2]);
    r.stderr_cardinality = parse_double(cells[3]);
    r.mean_iters = parse_double(cells[4]);
    r.infeasible_trials = std::stoi(cells[5]);
    if (timing) r.mean_wall_ms = parse_double(cells[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

SweepConfig read_sweep_config(std::istream& in) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("sweep config is not valid JSON: ") + e.what());
  }
  SweepConfig c;
  try {
    if (j.contains("axis")) c.axis = parse_axis(j["axis"].get<std::string>());
    c.axis_values = j.contains("values") ? j["values"].get<std::vector<double>>() : default_axis_values(c.axis);
    c.trials = j.value("trials", c.trials);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.threads = j.value("threads", c.threads);
    c.es_user_cap = j.value("es_user_cap", c.es_user_cap);
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("network")) {
      const auto& n = j["network"];
      c.network.num_antennas = n.value("num_antennas", c.network.num_antennas);
      c.network.num_users = n.value("num_users", c.network.num_users);
      c.network.cell_radius_m = n.value("cell_radius_m", c.network.cell_radius_m);
      c.network.ref_distance_m = n.value("ref_distance_m", c.network.ref_distance_m);
      c.network.pathloss_exponent = n.value("pathloss_exponent", c.network.pathloss_exponent);
      c.network.noise_sigma = n.value("noise_sigma", c.network.noise_sigma);
      c.network.snr_db = n.value("snr_db", c.network.snr_db);
    }
    if (j.contains("fbl")) {
      const auto& f = j["fbl"];
      c.epsilon = f.value("epsilon", c.epsilon);
      c.blocklength = f.value("blocklength", c.blocklength);
      c.data_bits = f.value("data_bits", c.data_bits);
    }
    if (j.contains("sca")) {
      const auto& s = j["sca"];
      c.sca.mu = s.value("mu", c.sca.mu);
      c.sca.delta = s.value("delta", c.sca.delta);
      c.sca.max_iters = s.value("max_iters", c.sca.max_iters);
      c.sca.round_threshold = s.value("round_threshold", c.sca.round_threshold);
      c.sca.max_tuning_rounds = s.value("max_tuning_rounds", c.sca.max_tuning_rounds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad sweep config field: ") + e.what());
  }
  c.validate();
  return c;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return read_sweep_config(in);
}

}  // namespace urllc
