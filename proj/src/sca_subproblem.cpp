#include "urllc/sca_subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "urllc/embedding.hpp"

namespace urllc {

double penalty_g(std::span<const double> kappa, double mu) {
  const double sum = std::accumulate(kappa.begin(), kappa.end(), 0.0);
  return mu * sum + mu * sum * sum;
}

double penalty_h(std::span<const double> kappa, double mu) {
  double sum = 0.0, sq = 0.0;
  for (double k : kappa) {
    sum += k;
    sq += k * k;
  }
  return mu * sq + mu * sum * sum;
}

double penalized_objective(std::span<const double> kappa, double mu) {
  const double sum = std::accumulate(kappa.begin(), kappa.end(), 0.0);
  return -sum + penalty_g(kappa, mu) - penalty_h(kappa, mu);
}

double surrogate_objective(std::span<const double> kappa, std::span<const double> kappa0, double mu) {
  const double sum0 = std::accumulate(kappa0.begin(), kappa0.end(), 0.0);
  double lin = penalty_h(kappa0, mu);
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    lin += 2.0 * mu * (kappa0[i] + sum0) * (kappa[i] - kappa0[i]);
  }
  const double sum = std::accumulate(kappa.begin(), kappa.end(), 0.0);
  return -sum + penalty_g(kappa, mu) - lin;
}

double sinr_lower_bound(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w, double phi,
                        const Eigen::VectorXcd& w0, double phi0) {
  const std::complex<double> c0 = h.dot(w0);
  const std::complex<double> c = h.dot(w);
  // Re(w0^H h h^H w) = Re(conj(h^H w0) h^H w)
  const double cross = (std::conj(c0) * c).real();
  return 2.0 * cross / phi0 - std::norm(c0) / (phi0 * phi0) * phi;
}

conic::ConicProgram build_sca_subproblem(const ChannelRealization& realization, const ScaLayout& layout,
                                         std::span<const double> gamma_tilde, double power_budget,
                                         const ScaState& prev, double mu) {
  const int n = layout.count();
  const int dim = layout.beam_dim();
  if (n == 0) throw std::invalid_argument("build_sca_subproblem: no users to optimize");
  for (int i = 0; i < n; ++i) {
    if (!(prev.phi.at(layout.users[i]) > 0.0)) {
      throw std::invalid_argument("build_sca_subproblem: linearization point needs phi > 0");
    }
  }

  conic::ConicProgram prog(layout.num_variables());
  prog.variable_names.resize(prog.num_variables);
  for (int i = 0; i < n; ++i) {
    const auto k = std::to_string(layout.users[i]);
    for (int j = 0; j < dim; ++j) {
      prog.variable_names[layout.beam(i) + j] =
          "w" + k + (j < layout.num_antennas ? "_re" : "_im") + std::to_string(j % layout.num_antennas);
    }
    prog.variable_names[layout.kappa(i)] = "kappa" + k;
    prog.variable_names[layout.phi(i)] = "phi" + k;
  }

  // Objective: -sum k + mu sum k + mu (sum k)^2 - [h(k0) + sum h'_i (k_i - k0_i)].
  std::vector<double> kappa0(n);
  for (int i = 0; i < n; ++i) kappa0[i] = prev.kappa.at(layout.users[i]);
  const double sum0 = std::accumulate(kappa0.begin(), kappa0.end(), 0.0);
  prog.objective.quadratic = Eigen::MatrixXd::Zero(prog.num_variables, prog.num_variables);
  double constant = -penalty_h(kappa0, mu);
  for (int i = 0; i < n; ++i) {
    const double grad = 2.0 * mu * (kappa0[i] + sum0);
    prog.objective.linear[layout.kappa(i)] = -1.0 + mu - grad;
    constant += grad * kappa0[i];
    for (int j = 0; j < n; ++j) prog.objective.quadratic(layout.kappa(i), layout.kappa(j)) = mu;
  }
  prog.objective.constant = constant;

  std::vector<InnerProductForms> forms;
  forms.reserve(n);
  for (int i = 0; i < n; ++i) forms.emplace_back(realization.normalized_channels.at(layout.users[i]));

  for (int i = 0; i < n; ++i) {
    const auto k = std::to_string(layout.users[i]);
    prog.add(conic::AffineInequality{conic::AffineExpr(0.0).add(layout.kappa(i), -1.0)}, "kappa_lo" + k);
    prog.add(conic::AffineInequality{conic::AffineExpr(-1.0).add(layout.kappa(i), 1.0)}, "kappa_hi" + k);
  }

  for (int i = 0; i < n; ++i) {
    conic::QuadraticVsAffine interference;
    for (int l = 0; l < n; ++l) {
      if (l == i) continue;
      conic::AffineExpr re, im;
      for (int j = 0; j < dim; ++j) {
        re.add(layout.beam(l) + j, forms[i].re[j]);
        im.add(layout.beam(l) + j, forms[i].im[j]);
      }
      interference.terms.push_back(std::move(re));
      interference.terms.push_back(std::move(im));
    }
    interference.bound = conic::AffineExpr(-1.0).add(layout.phi(i), 1.0);
    prog.add(std::move(interference), "interference" + std::to_string(layout.users[i]));
  }

  conic::SecondOrderCone power;
  power.head = conic::AffineExpr(std::sqrt(power_budget));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) power.tail.push_back(conic::AffineExpr().add(layout.beam(i) + j, 1.0));
  }
  prog.add(std::move(power), "power");

  for (int i = 0; i < n; ++i) {
    const int user = layout.users[i];
    const Eigen::VectorXd w0 = embed(prev.weights.at(user));
    const double phi0 = prev.phi[user];
    const double c_re = forms[i].re.dot(w0);
    const double c_im = forms[i].im.dot(w0);
    conic::AffineExpr bound;
    bound.add(layout.kappa(i), gamma_tilde[user]);
    for (int j = 0; j < dim; ++j) {
      // -2 Re(conj(c0) h^H w) / phi0
      bound.add(layout.beam(i) + j, -2.0 * (c_re * forms[i].re[j] + c_im * forms[i].im[j]) / phi0);
    }
    bound.add(layout.phi(i), (c_re * c_re + c_im * c_im) / (phi0 * phi0));
    prog.add(conic::AffineInequality{std::move(bound)}, "sinr_bound" + std::to_string(user));
  }
  return prog;
}

ScaState state_from_solution(const ScaLayout& layout, const Eigen::VectorXd& primal, int num_users,
                             int tau, double objective) {
  ScaState st;
  st.tau = tau;
  st.objective = objective;
  st.kappa.assign(num_users, 0.0);
  st.phi.assign(num_users, 1.0);
  st.weights.assign(num_users, Eigen::VectorXcd::Zero(layout.num_antennas));
  for (int i = 0; i < layout.count(); ++i) {
    const int k = layout.users[i];
    st.kappa[k] = std::clamp(primal[layout.kappa(i)], 0.0, 1.0);
    st.phi[k] = std::max(primal[layout.phi(i)], 1.0);
    st.weights[k] = unembed(primal.segment(layout.beam(i), layout.beam_dim()));
  }
  return st;
}

}  // namespace urllc
