#pragma once

#include <span>
#include <vector>

#include "urllc/channel.hpp"
#include "urllc/conic.hpp"

namespace urllc {

/// One iterate of the penalty SCA loop. Vectors span all K users; users
/// outside the optimized set hold kappa = 0 and a zero beam.
struct ScaState {
  int tau = 0;
  std::vector<double> kappa;
  Beams weights;
  std::vector<double> phi;
  double objective = 0.0;
};

/// Variable layout of the subproblem: per optimized user a 2*Nt block of
/// embedded beam coordinates, then one kappa and one phi per user.
struct ScaLayout {
  std::vector<int> users;
  int num_antennas = 0;

  int count() const { return static_cast<int>(users.size()); }
  int beam_dim() const { return 2 * num_antennas; }
  int beam(int i) const { return i * beam_dim(); }
  int kappa(int i) const { return count() * beam_dim() + i; }
  int phi(int i) const { return count() * beam_dim() + count() + i; }
  int num_variables() const { return count() * (beam_dim() + 2); }
};

/// Penalty terms g(k) = mu sum k + mu (sum k)^2 and h(k) = mu sum k^2 + mu (sum k)^2.
double penalty_g(std::span<const double> kappa, double mu);
double penalty_h(std::span<const double> kappa, double mu);

/// -sum k + g(k) - h(k): the penalized objective before linearization.
double penalized_objective(std::span<const double> kappa, double mu);

/// -sum k + g(k) - [h(k0) + grad h(k0) . (k - k0)]: the convex surrogate
/// objective linearized at k0.
double surrogate_objective(std::span<const double> kappa, std::span<const double> kappa0, double mu);

/// Builds the convex subproblem around `prev` over the users in `layout`:
///   minimize  -sum k + g(k) - linearized h(k)
///   s.t.      0 <= k_i <= 1
///             sum_{l != i} |h_i^H w_l|^2 + 1 <= phi_i
///             sum ||w_i||^2 <= P
///             k_i gt_i - 2 Re(w0_i^H h_i h_i^H w_i) / phi0_i + (|h_i^H w0_i| / phi0_i)^2 phi_i <= 0
/// gamma_tilde is indexed by user over the whole realization.
/// Throws std::invalid_argument if any prev.phi of an optimized user is not positive.
conic::ConicProgram build_sca_subproblem(const ChannelRealization& realization, const ScaLayout& layout,
                                         std::span<const double> gamma_tilde, double power_budget,
                                         const ScaState& prev, double mu);

/// Reads a subproblem solution back into a state (kappa clamped to [0, 1]).
ScaState state_from_solution(const ScaLayout& layout, const Eigen::VectorXd& primal, int num_users,
                             int tau, double objective);

/// Lower bound used in the last constraint, at (w, phi) around (w0, phi0).
double sinr_lower_bound(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w, double phi,
                        const Eigen::VectorXcd& w0, double phi0);

}  // namespace urllc
