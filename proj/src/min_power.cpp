#include "urllc/min_power.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "urllc/embedding.hpp"

namespace urllc {

namespace {

// Minimum powers above this multiple of the budget are reported as
// infeasible without resolving their exact value.
constexpr double kPowerCapFactor = 4.0;

}  // namespace

conic::ConicProgram build_min_power_program(const ChannelRealization& realization,
                                            std::span<const int> subset,
                                            std::span<const double> gamma_tilde, double power_cap) {
  if (subset.empty()) throw std::invalid_argument("min_power_feasible: empty subset");
  const int nt = realization.num_antennas();
  const int dim = 2 * nt;
  const int count = static_cast<int>(subset.size());
  conic::ConicProgram prog(count * dim);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < dim; ++j) {
      prog.variable_names.push_back("w" + std::to_string(subset[i]) + (j < nt ? "_re" : "_im") +
                                    std::to_string(j % nt));
    }
  }
  prog.objective.quadratic = Eigen::MatrixXd::Identity(prog.num_variables, prog.num_variables);

  for (int i = 0; i < count; ++i) {
    const int k = subset[i];
    const InnerProductForms f(realization.normalized_channels.at(k));
    const double root = std::sqrt(gamma_tilde[k]);
    conic::SecondOrderCone cone;
    for (int j = 0; j < dim; ++j) cone.head.add(i * dim + j, f.re[j] / root);
    for (int l = 0; l < count; ++l) {
      if (l == i) continue;
      conic::AffineExpr re, im;
      for (int j = 0; j < dim; ++j) {
        re.add(l * dim + j, f.re[j]);
        im.add(l * dim + j, f.im[j]);
      }
      cone.tail.push_back(std::move(re));
      cone.tail.push_back(std::move(im));
    }
    cone.tail.emplace_back(1.0);
    prog.add(std::move(cone), "sinr_" + std::to_string(k));
  }

  conic::SecondOrderCone power;
  power.head = conic::AffineExpr(std::sqrt(power_cap));
  for (int v = 0; v < prog.num_variables; ++v) power.tail.push_back(conic::AffineExpr().add(v, 1.0));
  prog.add(std::move(power), "power_cap");
  return prog;
}

PowerMinResult min_power_feasible(const ChannelRealization& realization, std::span<const int> subset,
                                  std::span<const double> gamma_tilde, double power_budget,
                                  const conic::SolverSettings& settings) {
  if (subset.empty()) throw std::invalid_argument("min_power_feasible: empty subset");
  const int K = realization.num_users();
  const int nt = realization.num_antennas();
  if (static_cast<int>(gamma_tilde.size()) != K) {
    throw std::invalid_argument("min_power_feasible: one SINR target per user is required");
  }

  PowerMinResult res;
  res.weights.assign(K, Eigen::VectorXcd::Zero(nt));

  for (int k : subset) {
    if (realization.normalized_channels.at(k).squaredNorm() == 0.0) {
      res.power = std::numeric_limits<double>::infinity();
      return res;
    }
  }

  const auto prog = build_min_power_program(realization, subset, gamma_tilde,
                                            kPowerCapFactor * power_budget);
  const auto sol = conic::solve(prog, settings);
  if (sol.status == conic::SolveStatus::infeasible) {
    res.power = std::numeric_limits<double>::infinity();
    return res;
  }
  if (sol.status != conic::SolveStatus::optimal) {
    res.indeterminate = true;
    res.power = std::numeric_limits<double>::infinity();
    return res;
  }

  const int dim = 2 * nt;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    Eigen::VectorXcd w = unembed(sol.primal.segment(static_cast<Eigen::Index>(i) * dim, dim));
    // Rotate so h^H w is real non-negative; leaves power and every SINR unchanged.
    const std::complex<double> g = realization.normalized_channels[subset[i]].dot(w);
    if (std::abs(g) > 0.0) w *= std::conj(g) / std::abs(g);
    res.weights[subset[i]] = std::move(w);
  }
  res.power = total_power(res.weights, subset);
  res.feasible = res.power <= power_budget + kPowerFeasibilityMargin;
  return res;
}

}  // namespace urllc
