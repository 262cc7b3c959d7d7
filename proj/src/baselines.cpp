#include "urllc/baselines.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "urllc/min_power.hpp"

namespace urllc {

namespace {

using Mask = std::uint32_t;

UserSet members(Mask m, const UserSet& pool) {
  UserSet s;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (m & (Mask{1} << i)) s.push_back(pool[i]);
  }
  return s;
}

// Calls f(mask) for every size-r subset of n items in lexicographic order;
// stops early when f returns true.
template <class F>
bool for_each_combination(int n, int r, F&& f) {
  std::vector<int> idx(r);
  for (int i = 0; i < r; ++i) idx[i] = i;
  while (true) {
    Mask m = 0;
    for (int i : idx) m |= Mask{1} << i;
    if (f(m)) return true;
    int i = r - 1;
    while (i >= 0 && idx[i] == n - r + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

EsResult exhaustive_search(const ChannelRealization& realization, std::span<const double> gamma_tilde,
                           double power_budget, int user_cap, const conic::SolverSettings& settings) {
  const int K = realization.num_users();
  if (K > user_cap) {
    throw std::invalid_argument("exhaustive search refuses K = " + std::to_string(K) +
                                " (cap " + std::to_string(user_cap) + "); lower the number of users");
  }
  EsResult res;
  res.weights.assign(K, Eigen::VectorXcd::Zero(realization.num_antennas()));

  // A single user needs gamma / ||h||^2 power under MRT, which is optimal alone.
  UserSet pool;
  for (int k = 0; k < K; ++k) {
    const double gain = realization.normalized_channels[k].squaredNorm();
    if (gain > 0.0 && gamma_tilde[k] / gain <= power_budget + kPowerFeasibilityMargin) pool.push_back(k);
  }
  const int n = static_cast<int>(pool.size());
  if (n == 0) return res;

  // Feasibility only shrinks as users are added, so every superset of an
  // infeasible set is infeasible.
  std::vector<Mask> infeasible;
  auto known_infeasible = [&](Mask m) {
    return std::any_of(infeasible.begin(), infeasible.end(), [m](Mask bad) { return (m & bad) == bad; });
  };
  auto check = [&](Mask m, PowerMinResult& out) {
    ++res.subsets_checked;
    const UserSet s = members(m, pool);
    out = min_power_feasible(realization, s, gamma_tilde, power_budget, settings);
    return out.feasible;
  };

  if (n >= 3) {
    for_each_combination(n, 2, [&](Mask m) {
      PowerMinResult pr;
      if (!check(m, pr)) infeasible.push_back(m);
      return false;
    });
  }

  for (int size = n; size >= 1; --size) {
    bool found = false;
    for_each_combination(n, size, [&](Mask m) {
      if (known_infeasible(m)) return false;
      PowerMinResult pr;
      if (!check(m, pr)) {
        infeasible.push_back(m);
        return false;
      }
      res.best_set = members(m, pool);
      res.weights = std::move(pr.weights);
      res.min_power = pr.power;
      found = true;
      return true;
    });
    if (found) break;
  }
  return res;
}

ShannonResult shannon_schedule(const ChannelRealization& realization, const FblParams& params,
                               double power_budget, const ScaConfig& config) {
  const std::vector<double> targets(realization.num_users(), shannon_min_sinr(params));
  ShannonResult out;
  out.raw = run_with_tuning(realization, params, power_budget, config, targets);

  UserSet kept;
  for (int k : out.raw.scheduled_set) {
    if (out.raw.per_user_rate_nats[k] >= params.rate_target_nats - kRateVerifyTolerance) kept.push_back(k);
  }
  out.verified = verified_solution(realization, params, kept, out.raw.weights);
  out.verified.iterations_used = out.raw.iterations_used;
  out.verified.tuning_rounds_used = out.raw.tuning_rounds_used;
  out.verified.status = out.raw.status;
  return out;
}

}  // namespace urllc
