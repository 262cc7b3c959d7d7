#include "urllc/sca_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "urllc/min_power.hpp"

namespace urllc {

void ScaConfig::validate() const {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be non-negative");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(round_threshold > 0.0 && round_threshold < 1.0)) {
    throw std::invalid_argument("round_threshold must lie in (0, 1)");
  }
  if (!(beam_power_floor >= 0.0)) throw std::invalid_argument("beam_power_floor must be non-negative");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iters: return "max-iters";
    case RunStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

UserSet prefilter(const ChannelRealization& realization, std::span<const double> gamma_tilde,
                  double power_budget) {
  UserSet out;
  for (int k = 0; k < realization.num_users(); ++k) {
    const double gain = realization.normalized_channels[k].squaredNorm();
    if (gain > 0.0 && power_budget * gain >= gamma_tilde[k]) out.push_back(k);
  }
  return out;
}

ScaState initialize(const ChannelRealization& realization, std::span<const double> gamma_tilde,
                    double power_budget, std::span<const int> candidates, const ScaConfig& config,
                    std::span<const int> zeroed) {
  (void)config;
  if (candidates.empty()) throw std::invalid_argument("initialize: no candidate users");
  const int K = realization.num_users();
  const int nt = realization.num_antennas();
  auto is_zeroed = [&](int k) { return std::find(zeroed.begin(), zeroed.end(), k) != zeroed.end(); };

  int powered = 0;
  for (int k : candidates) powered += is_zeroed(k) ? 0 : 1;

  ScaState st;
  st.weights.assign(K, Eigen::VectorXcd::Zero(nt));
  st.kappa.assign(K, 0.0);
  st.phi.assign(K, 1.0);
  if (powered > 0) {
    const double per_user = power_budget / powered;
    for (int k : candidates) {
      if (is_zeroed(k)) continue;
      const auto& h = realization.normalized_channels[k];
      st.weights[k] = std::sqrt(per_user) * h / h.norm();
    }
  }
  for (int k : candidates) {
    const auto& h = realization.normalized_channels[k];
    double interference = 0.0;
    for (int l : candidates) {
      if (l != k) interference += std::norm(h.dot(st.weights[l]));
    }
    st.phi[k] = interference + 1.0;
    const double gamma = std::norm(h.dot(st.weights[k])) / st.phi[k];
    st.kappa[k] = std::min(1.0, gamma / gamma_tilde[k]);
  }
  std::vector<double> kc;
  for (int k : candidates) kc.push_back(st.kappa[k]);
  st.objective = penalized_objective(kc, config.mu);
  return st;
}

IterateResult iterate(const ChannelRealization& realization, const ScaLayout& layout,
                      std::span<const double> gamma_tilde, double power_budget, const ScaState& state,
                      const ScaConfig& config) {
  const auto prog = build_sca_subproblem(realization, layout, gamma_tilde, power_budget, state, config.mu);
  const auto sol = conic::solve(prog, config.solver);
  if (sol.status != conic::SolveStatus::optimal) return {state, true};

  ScaState next = state_from_solution(layout, sol.primal, realization.num_users(), state.tau + 1, 0.0);
  std::vector<double> k0, k1;
  for (int k : layout.users) {
    k0.push_back(state.kappa[k]);
    k1.push_back(next.kappa[k]);
  }
  next.objective = surrogate_objective(k1, k0, config.mu);
  return {std::move(next), false};
}

bool converged(double previous, double current, double delta) {
  if (std::abs(previous) < 1e-12) return std::abs(current - previous) <= delta * 1e-3;
  return std::abs((current - previous) / previous) <= delta;
}

std::vector<double> fbl_targets(const FblParams& params, int num_users) {
  return std::vector<double>(num_users, min_sinr(params));
}

SchedulingSolution verified_solution(const ChannelRealization& realization, const FblParams& params,
                                     UserSet scheduled, Beams weights) {
  const int K = realization.num_users();
  SchedulingSolution s;
  std::sort(scheduled.begin(), scheduled.end());
  s.per_user_sinr.assign(K, 0.0);
  s.per_user_rate_nats.assign(K, 0.0);
  for (int k = 0; k < K; ++k) {
    if (std::find(scheduled.begin(), scheduled.end(), k) == scheduled.end()) {
      weights[k].setZero();
    }
  }
  for (int k : scheduled) {
    s.per_user_sinr[k] = sinr(weights, realization, scheduled, k);
    s.per_user_rate_nats[k] = rate(s.per_user_sinr[k], params);
  }
  s.total_power = total_power(weights, scheduled);
  s.scheduled_set = std::move(scheduled);
  s.weights = std::move(weights);
  return s;
}

namespace {

struct LoopOutcome {
  ScaState state;
  int iterations = 0;
  RunStatus status = RunStatus::degenerate;
};

LoopOutcome sca_loop(const ChannelRealization& realization, std::span<const double> gamma_tilde,
                     double power_budget, const UserSet& candidates, const ScaConfig& config,
                     std::span<const int> zeroed, const TraceSink& trace, int round) {
  LoopOutcome out;
  out.state = initialize(realization, gamma_tilde, power_budget, candidates, config, zeroed);
  const ScaLayout layout{candidates, realization.num_antennas()};

  auto emit = [&](const ScaState& st) {
    if (!trace) return;
    double ksum = 0.0;
    for (double k : st.kappa) ksum += k;
    trace({round, st.tau, st.objective, ksum, total_power(st.weights, candidates)});
  };
  emit(out.state);

  out.status = RunStatus::max_iters;
  for (int it = 0; it < config.max_iters; ++it) {
    auto step = iterate(realization, layout, gamma_tilde, power_budget, out.state, config);
    if (step.solver_failed) {
      out.status = out.iterations == 0 ? RunStatus::degenerate : RunStatus::max_iters;
      break;
    }
    const double previous = out.state.objective;
    out.state = std::move(step.state);
    ++out.iterations;
    emit(out.state);
    if (converged(previous, out.state.objective, config.delta)) {
      out.status = RunStatus::converged;
      break;
    }
  }
  return out;
}

// Rounds kappa, then drops the lowest-kappa user until the set is verified
// feasible by the power-minimization program.
SchedulingSolution round_and_verify(const ChannelRealization& realization, const FblParams& params,
                                    std::span<const double> gamma_tilde, double power_budget,
                                    const UserSet& candidates, const ScaState& state,
                                    const ScaConfig& config) {
  UserSet chosen;
  for (int k : candidates) {
    if (state.kappa[k] >= config.round_threshold) chosen.push_back(k);
  }
  // Highest kappa first; ties resolved by index for determinism.
  std::stable_sort(chosen.begin(), chosen.end(),
                   [&](int a, int b) { return state.kappa[a] > state.kappa[b]; });
  while (!chosen.empty()) {
    auto mp = min_power_feasible(realization, chosen, gamma_tilde, power_budget, config.solver);
    if (mp.feasible) return verified_solution(realization, params, chosen, std::move(mp.weights));
    chosen.pop_back();
  }
  return verified_solution(realization, params, {},
                           Beams(realization.num_users(),
                                 Eigen::VectorXcd::Zero(realization.num_antennas())));
}

bool better(const SchedulingSolution& a, const SchedulingSolution& b) {
  if (a.cardinality() != b.cardinality()) return a.cardinality() > b.cardinality();
  return a.total_power < b.total_power - 1e-12;
}

struct Prepared {
  std::vector<double> targets;
  UserSet candidates;
};

Prepared prepare(const ChannelRealization& realization, const FblParams& params, double power_budget,
                 const ScaConfig& config, std::optional<std::vector<double>> gamma_tilde) {
  config.validate();
  if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be positive");
  Prepared p;
  p.targets = gamma_tilde ? std::move(*gamma_tilde) : fbl_targets(params, realization.num_users());
  if (static_cast<int>(p.targets.size()) != realization.num_users()) {
    throw std::invalid_argument("one SINR target per user is required");
  }
  p.candidates = prefilter(realization, p.targets, power_budget);
  return p;
}

SchedulingSolution empty_solution(const ChannelRealization& realization, const FblParams& params) {
  auto s = verified_solution(realization, params, {},
                             Beams(realization.num_users(),
                                   Eigen::VectorXcd::Zero(realization.num_antennas())));
  s.status = RunStatus::degenerate;
  return s;
}

}  // namespace

SchedulingSolution run(const ChannelRealization& realization, const FblParams& params,
                       double power_budget, const ScaConfig& config,
                       std::optional<std::vector<double>> gamma_tilde, const TraceSink& trace) {
  const auto prep = prepare(realization, params, power_budget, config, std::move(gamma_tilde));
  if (prep.candidates.empty()) return empty_solution(realization, params);

  const auto loop = sca_loop(realization, prep.targets, power_budget, prep.candidates, config, {}, trace, 0);
  auto sol = round_and_verify(realization, params, prep.targets, power_budget, prep.candidates, loop.state,
                              config);
  sol.iterations_used = loop.iterations;
  sol.status = loop.status;
  return sol;
}

SchedulingSolution run_with_tuning(const ChannelRealization& realization, const FblParams& params,
                                   double power_budget, const ScaConfig& config,
                                   std::optional<std::vector<double>> gamma_tilde, const TraceSink& trace) {
  const auto prep = prepare(realization, params, power_budget, config, std::move(gamma_tilde));
  if (prep.candidates.empty()) return empty_solution(realization, params);

  auto loop = sca_loop(realization, prep.targets, power_budget, prep.candidates, config, {}, trace, 0);
  auto best = round_and_verify(realization, params, prep.targets, power_budget, prep.candidates,
                               loop.state, config);
  best.status = loop.status;
  int total_iterations = loop.iterations;
  int rounds = 0;

  if (config.tuning_enabled) {
    const int max_rounds =
        config.max_tuning_rounds > 0 ? config.max_tuning_rounds : realization.num_users();
    UserSet zeroed;
    for (int round = 1; round <= max_rounds; ++round) {
      int pick = -1;
      for (int k : prep.candidates) {
        if (std::find(zeroed.begin(), zeroed.end(), k) != zeroed.end()) continue;
        if (loop.state.kappa[k] >= config.round_threshold) continue;
        if (loop.state.weights[k].squaredNorm() <= config.beam_power_floor) continue;
        if (pick < 0 || loop.state.kappa[k] < loop.state.kappa[pick]) pick = k;
      }
      if (pick < 0) break;
      zeroed.push_back(pick);
      if (zeroed.size() >= prep.candidates.size()) break;

      loop = sca_loop(realization, prep.targets, power_budget, prep.candidates, config, zeroed, trace, round);
      total_iterations += loop.iterations;
      rounds = round;
      auto sol = round_and_verify(realization, params, prep.targets, power_budget, prep.candidates,
                                  loop.state, config);
      sol.status = loop.status;
      if (better(sol, best)) best = std::move(sol);
    }
  }
  best.iterations_used = total_iterations;
  best.tuning_rounds_used = rounds;
  return best;
}

TraceSink csv_trace(std::ostream& out) {
  out << "tuning_round,tau,objective,kappa_sum,power\n";
  return [&out](const TraceRow& r) {
    out << r.tuning_round << ',' << r.tau << ',' << r.objective << ',' << r.kappa_sum << ',' << r.power
        << '\n';
  };
}

}  // namespace urllc
