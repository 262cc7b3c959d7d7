#pragma once

#include <span>

#include "urllc/channel.hpp"
#include "urllc/conic.hpp"

namespace urllc {

struct PowerMinResult {
  bool feasible = false;
  /// The solver failed; callers treat this as infeasible.
  bool indeterminate = false;
  /// Minimum total power for the subset (infinity when the targets cannot be
  /// met within the search cap).
  double power = 0.0;
  Beams weights;  // one per user of the realization, zero outside the subset
};

/// Power margin applied to the feasibility decision.
inline constexpr double kPowerFeasibilityMargin = 1e-9;

/// minimize sum ||w_k||^2 subject to SINR_k >= gamma_tilde[k] for k in subset,
/// written as Re(h_k^H w_k) >= sqrt(gamma_k) * ||(h_k^H w_l)_{l != k}, 1||.
/// The imaginary part of h_k^H w_k is left free; the optimum can always be
/// rotated to a real non-negative phase, so the relaxation is exact.
/// gamma_tilde is indexed by user over the whole realization.
PowerMinResult min_power_feasible(const ChannelRealization& realization, std::span<const int> subset,
                                  std::span<const double> gamma_tilde, double power_budget,
                                  const conic::SolverSettings& settings = {});

/// The underlying program, with total power capped at `power_cap`.
conic::ConicProgram build_min_power_program(const ChannelRealization& realization,
                                            std::span<const int> subset,
                                            std::span<const double> gamma_tilde, double power_cap);

}  // namespace urllc
