#pragma once

#include <span>

#include "urllc/channel.hpp"
#include "urllc/fbl_rate.hpp"
#include "urllc/sca_scheduler.hpp"

namespace urllc {

inline constexpr int kDefaultEsUserCap = 10;

struct EsResult {
  UserSet best_set;
  Beams weights;
  double min_power = 0.0;
  long subsets_checked = 0;
};

/// Exact largest feasible subset: subsets are tried in decreasing size and the
/// first feasible one wins. Sets containing a known-infeasible set (single
/// users and pairs are certified up front) are skipped without a solve.
/// Throws std::invalid_argument when K exceeds `user_cap`.
EsResult exhaustive_search(const ChannelRealization& realization, std::span<const double> gamma_tilde,
                           double power_budget, int user_cap = kDefaultEsUserCap,
                           const conic::SolverSettings& settings = {});

struct ShannonResult {
  SchedulingSolution raw;       // scheduled with 2^(D/n) - 1 targets
  SchedulingSolution verified;  // users failing the finite-blocklength rate removed

  int raw_cardinality() const { return raw.cardinality(); }
  int verified_cardinality() const { return verified.cardinality(); }
};

/// Slack on the rate check: min-power beams sit on the SINR threshold up to
/// solver accuracy.
inline constexpr double kRateVerifyTolerance = 1e-7;

/// Runs the tuned SCA pipeline at the Shannon thresholds, then removes every
/// scheduled user whose finite-blocklength rate falls below the target.
ShannonResult shannon_schedule(const ChannelRealization& realization, const FblParams& params,
                               double power_budget, const ScaConfig& config);

}  // namespace urllc
