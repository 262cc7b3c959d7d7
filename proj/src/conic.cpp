#include "urllc/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace urllc::conic {

double AffineExpr::evaluate(const Eigen::VectorXd& x) const {
  double v = constant;
  for (const auto& [var, coef] : terms) v += coef * x[var];
  return v;
}

double violation(const Constraint& c, const Eigen::VectorXd& x) {
  struct Visitor {
    const Eigen::VectorXd& x;
    double operator()(const AffineInequality& a) const { return a.expr.evaluate(x); }
    double operator()(const SecondOrderCone& s) const {
      double sq = 0.0;
      for (const auto& t : s.tail) sq += std::pow(t.evaluate(x), 2);
      return std::sqrt(sq) - s.head.evaluate(x);
    }
    double operator()(const QuadraticVsAffine& q) const {
      double sq = 0.0;
      for (const auto& t : q.terms) sq += std::pow(t.evaluate(x), 2);
      return sq - q.bound.evaluate(x);
    }
  };
  return std::visit(Visitor{x}, c);
}

double QuadraticObjective::evaluate(const Eigen::VectorXd& x) const {
  double v = constant;
  if (linear.size() > 0) v += linear.dot(x);
  if (quadratic.size() > 0) v += x.dot(quadratic * x);
  return v;
}

ConicProgram::ConicProgram(int n) : num_variables(n) {
  objective.linear = Eigen::VectorXd::Zero(n);
}

void ConicProgram::add(Constraint c, std::string label) {
  constraints.push_back(std::move(c));
  constraint_labels.push_back(std::move(label));
}

void ConicProgram::validate() const {
  const int n = num_variables;
  if (n <= 0) throw std::invalid_argument("program has no variables");
  if (objective.linear.size() != n) throw std::invalid_argument("objective size mismatch");
  if (objective.quadratic.size() > 0) {
    if (objective.quadratic.rows() != n || objective.quadratic.cols() != n) {
      throw std::invalid_argument("quadratic objective size mismatch");
    }
    const Eigen::MatrixXd sym = 0.5 * (objective.quadratic + objective.quadratic.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw std::invalid_argument("quadratic objective is not positive semidefinite");
    }
  }
  auto check = [n](const AffineExpr& e) {
    for (const auto& [var, coef] : e.terms) {
      if (var < 0 || var >= n) {
        throw std::invalid_argument("constraint references undeclared variable " +
                                    std::to_string(var));
      }
      if (!std::isfinite(coef)) throw std::invalid_argument("non-finite coefficient");
    }
    if (!std::isfinite(e.constant)) throw std::invalid_argument("non-finite constant");
  };
  for (const auto& c : constraints) {
    if (const auto* a = std::get_if<AffineInequality>(&c)) {
      check(a->expr);
    } else if (const auto* s = std::get_if<SecondOrderCone>(&c)) {
      check(s->head);
      for (const auto& t : s->tail) check(t);
    } else {
      const auto& q = std::get<QuadraticVsAffine>(c);
      check(q.bound);
      for (const auto& t : q.terms) check(t);
    }
  }
}

double ConicProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) worst = std::max(worst, violation(c, x));
  return worst;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

// Standard form: minimize c'x  s.t.  G x + s = h,  s in R+^l x Q^{q_1} x ...
struct StandardForm {
  int n = 0;
  int lp_rows = 0;
  std::vector<int> soc_offsets;
  std::vector<int> soc_dims;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  // Column support and gathered rows per block; block 0..lp_rows-1 are the
  // LP rows, then one block per cone.
  std::vector<std::vector<int>> lp_support;
  std::vector<std::vector<int>> soc_support;
  std::vector<Eigen::MatrixXd> soc_blocks;

  int rows() const { return static_cast<int>(h.size()); }
  int degree() const { return lp_rows + static_cast<int>(soc_dims.size()); }
};

struct RowBuilder {
  std::vector<std::pair<std::vector<std::pair<int, double>>, double>> lp;  // g, h
  std::vector<std::vector<std::pair<std::vector<std::pair<int, double>>, double>>> socs;

  // s = h - g'x >= 0  for  expr <= 0, i.e. g = coefs, h = -constant.
  void affine_le_zero(const AffineExpr& e) { lp.emplace_back(e.terms, -e.constant); }

  // s = (head, tail) in Q; s = h - G x  =>  G row = -coefs, h = constant.
  static std::pair<std::vector<std::pair<int, double>>, double> cone_row(const AffineExpr& e) {
    std::vector<std::pair<int, double>> g;
    for (const auto& [v, a] : e.terms) g.emplace_back(v, -a);
    return {std::move(g), e.constant};
  }
  void soc(const AffineExpr& head, const std::vector<AffineExpr>& tail) {
    std::vector<std::pair<std::vector<std::pair<int, double>>, double>> block;
    block.push_back(cone_row(head));
    for (const auto& t : tail) block.push_back(cone_row(t));
    socs.push_back(std::move(block));
  }
  // sum terms^2 <= bound  <=>  ||(terms, (bound - 1) / 2)|| <= (bound + 1) / 2
  void quad_vs_affine(const std::vector<AffineExpr>& terms, const AffineExpr& bound) {
    if (terms.empty()) {
      AffineExpr neg;
      for (const auto& [v, a] : bound.terms) neg.add(v, -a);
      neg.constant = -bound.constant;
      affine_le_zero(neg);
      return;
    }
    AffineExpr head;
    AffineExpr last;
    for (const auto& [v, a] : bound.terms) {
      head.add(v, 0.5 * a);
      last.add(v, 0.5 * a);
    }
    head.constant = 0.5 * (bound.constant + 1.0);
    last.constant = 0.5 * (bound.constant - 1.0);
    std::vector<AffineExpr> tail = terms;
    tail.push_back(last);
    soc(head, tail);
  }
};

std::vector<int> support_of(const Eigen::MatrixXd& rows) {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    if (rows.col(j).cwiseAbs().maxCoeff() > 0.0) s.push_back(static_cast<int>(j));
  }
  return s;
}

StandardForm lower(const ConicProgram& p) {
  RowBuilder rb;
  for (const auto& c : p.constraints) {
    if (const auto* a = std::get_if<AffineInequality>(&c)) {
      rb.affine_le_zero(a->expr);
    } else if (const auto* s = std::get_if<SecondOrderCone>(&c)) {
      rb.soc(s->head, s->tail);
    } else {
      const auto& q = std::get<QuadraticVsAffine>(c);
      rb.quad_vs_affine(q.terms, q.bound);
    }
  }

  StandardForm sf;
  int n = p.num_variables;
  Eigen::VectorXd cost = p.objective.linear;

  // Quadratic objective goes to an epigraph variable t >= ||F x||^2, Q = F'F.
  if (p.objective.quadratic.size() > 0 && p.objective.quadratic.cwiseAbs().maxCoeff() > 0.0) {
    const Eigen::MatrixXd sym = 0.5 * (p.objective.quadratic + p.objective.quadratic.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const double top = eig.eigenvalues().maxCoeff();
    std::vector<AffineExpr> terms;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
      const double lam = eig.eigenvalues()[i];
      if (lam <= 1e-14 * top) continue;
      AffineExpr row;
      const double s = std::sqrt(lam);
      for (int j = 0; j < n; ++j) {
        const double v = s * eig.eigenvectors()(j, i);
        if (std::abs(v) > 1e-300) row.add(j, v);
      }
      terms.push_back(std::move(row));
    }
    AffineExpr bound;
    bound.add(n, 1.0);
    rb.quad_vs_affine(terms, bound);
    cost.conservativeResize(n + 1);
    cost[n] = 1.0;
    ++n;
  }

  sf.n = n;
  sf.c = cost;
  sf.lp_rows = static_cast<int>(rb.lp.size());
  int m = sf.lp_rows;
  for (const auto& b : rb.socs) {
    sf.soc_offsets.push_back(m);
    sf.soc_dims.push_back(static_cast<int>(b.size()));
    m += static_cast<int>(b.size());
  }
  sf.G = Eigen::MatrixXd::Zero(m, n);
  sf.h = Eigen::VectorXd::Zero(m);
  int r = 0;
  for (const auto& [g, hv] : rb.lp) {
    for (const auto& [v, a] : g) sf.G(r, v) += a;
    sf.h[r] = hv;
    ++r;
  }
  for (const auto& b : rb.socs) {
    for (const auto& [g, hv] : b) {
      for (const auto& [v, a] : g) sf.G(r, v) += a;
      sf.h[r] = hv;
      ++r;
    }
  }

  for (int i = 0; i < sf.lp_rows; ++i) sf.lp_support.push_back(support_of(sf.G.row(i)));
  for (std::size_t k = 0; k < sf.soc_dims.size(); ++k) {
    const Eigen::MatrixXd rows = sf.G.middleRows(sf.soc_offsets[k], sf.soc_dims[k]);
    auto sup = support_of(rows);
    Eigen::MatrixXd block(rows.rows(), static_cast<Eigen::Index>(sup.size()));
    for (std::size_t j = 0; j < sup.size(); ++j) block.col(j) = rows.col(sup[j]);
    sf.soc_support.push_back(std::move(sup));
    sf.soc_blocks.push_back(std::move(block));
  }
  return sf;
}

double soc_det(const Eigen::Ref<const Eigen::VectorXd>& u) {
  return u[0] * u[0] - u.tail(u.size() - 1).squaredNorm();
}

// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
struct Scaling {
  Eigen::VectorXd lp_w;                 // diagonal, sqrt(s / z)
  std::vector<double> beta;             // per cone
  std::vector<Eigen::VectorXd> wbar;    // per cone reflection vector v, v' J v = 1
};

Scaling compute_scaling(const StandardForm& sf, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
  Scaling w;
  w.lp_w = (s.head(sf.lp_rows).array() / z.head(sf.lp_rows).array()).sqrt();
  for (std::size_t k = 0; k < sf.soc_dims.size(); ++k) {
    const auto sk = s.segment(sf.soc_offsets[k], sf.soc_dims[k]);
    const auto zk = z.segment(sf.soc_offsets[k], sf.soc_dims[k]);
    const double ds = std::sqrt(soc_det(sk));
    const double dz = std::sqrt(soc_det(zk));
    const Eigen::VectorXd sn = sk / ds;
    const Eigen::VectorXd zn = zk / dz;
    const double gamma = std::sqrt(0.5 * (1.0 + sn.dot(zn)));
    Eigen::VectorXd wb = sn;
    wb[0] += zn[0];
    wb.tail(wb.size() - 1) -= zn.tail(zn.size() - 1);
    wb /= 2.0 * gamma;
    // Reflection vector v = (wbar + e) / sqrt(2 (wbar_0 + 1)); W = beta (2 v v' - J).
    wb[0] += 1.0;
    wb /= std::sqrt(2.0 * wb[0]);
    w.beta.push_back(std::sqrt(ds / dz));
    w.wbar.push_back(std::move(wb));
  }
  return w;
}

void apply_j(Eigen::Ref<Eigen::VectorXd> v) { v.tail(v.size() - 1) *= -1.0; }

// y = W v  (inverse == false)  or  y = W^{-1} v  (inverse == true)
Eigen::VectorXd apply_w(const StandardForm& sf, const Scaling& w, const Eigen::VectorXd& v, bool inverse) {
  Eigen::VectorXd y(v.size());
  if (inverse) {
    y.head(sf.lp_rows) = v.head(sf.lp_rows).array() / w.lp_w.array();
  } else {
    y.head(sf.lp_rows) = v.head(sf.lp_rows).array() * w.lp_w.array();
  }
  for (std::size_t k = 0; k < sf.soc_dims.size(); ++k) {
    const int off = sf.soc_offsets[k];
    const int dim = sf.soc_dims[k];
    const Eigen::VectorXd& wb = w.wbar[k];
    Eigen::VectorXd vk = v.segment(off, dim);
    if (!inverse) {
      // beta (2 wb wb' - J) v
      const double proj = wb.dot(vk);
      apply_j(vk);
      y.segment(off, dim) = w.beta[k] * (2.0 * proj * wb - vk);
    } else {
      // (1/beta) (2 J wb wb' J - J) v
      Eigen::VectorXd jw = wb;
      apply_j(jw);
      const double proj = jw.dot(vk);
      apply_j(vk);
      y.segment(off, dim) = (2.0 * proj * jw - vk) / w.beta[k];
    }
  }
  return y;
}

// Jordan product u o v.
Eigen::VectorXd jordan(const StandardForm& sf, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  Eigen::VectorXd r(u.size());
  r.head(sf.lp_rows) = u.head(sf.lp_rows).cwiseProduct(v.head(sf.lp_rows));
  for (std::size_t k = 0; k < sf.soc_dims.size(); ++k) {
    const int off = sf.soc_offsets[k];
    const int dim = sf.soc_dims[k];
    const auto uk = u.segment(off, dim);
    const auto vk = v.segment(off, dim);
    r[off] = uk.dot(vk);
    r.segment(off + 1, dim - 1) = uk[0] * vk.tail(dim - 1) + vk[0] * uk.tail(dim - 1);
  }
  return r;
}

// Solves lambda o u = r for u.
Eigen::VectorXd jordan_solve(const StandardForm& sf, const Eigen::VectorXd& lambda, const Eigen::VectorXd& r) {
  Eigen::VectorXd u(r.size());
  u.head(sf.lp_rows) = r.head(sf.lp_rows).array() / lambda.head(sf.lp_rows).array();
  for (std::size_t k = 0; k < sf.soc_dims.size(); ++k) {
    const int off = sf.soc_offsets[k];
    const int dim = sf.soc_dims[k];
    const auto l = lambda.segment(off, dim);
    const auto rk = r.segment(off, dim);
    const double l0 = l[0];
    const double u0 = (l0 * rk[0] - l.tail(dim - 1).dot(rk.tail(dim - 1))) / soc_det(l);
    u[off] = u0;
    u.segment(off + 1, dim - 1) = (rk.tail(dim - 1) - u0 * l.tail(dim - 1)) / l0;
  }
  return u;
}

Eigen::VectorXd identity_element(const StandardForm& sf) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(sf.rows());
  e.head(sf.lp_rows).setOnes();
  for (int off : sf.soc_offsets) e[off] = 1.0;
  return e;
}

// Largest alpha with u + alpha d in the cone (infinity if unbounded).
double max_step(const StandardForm& sf, const Eigen::VectorXd& u, const Eigen::VectorXd& d) {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sf.lp_rows; ++i) {
    if (d[i] < 0.0) alpha = std::min(alpha, -u[i] / d[i]);
  }
  for (std::size_t k = 0; k < sf.soc_dims.size(); ++k) {
    const int off = sf.soc_offsets[k];
    const int dim = sf.soc_dims[k];
    const auto uk = u.segment(off, dim);
    const auto dk = d.segment(off, dim);
    const double d1 = dk.tail(dim - 1).norm();
    if (dk[0] >= d1) continue;
    const double a = dk[0] * dk[0] - d1 * d1;
    const double b = uk[0] * dk[0] - uk.tail(dim - 1).dot(dk.tail(dim - 1));
    const double c = std::max(soc_det(uk), 0.0);
    const double denom = std::sqrt(std::max(b * b - a * c, 0.0)) - b;
    if (denom > 0.0) alpha = std::min(alpha, c / denom);
  }
  return alpha;
}

// Shift a point into the cone interior as in the standard initialization.
Eigen::VectorXd shift_into_cone(const StandardForm& sf, Eigen::VectorXd u) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < sf.lp_rows; ++i) worst = std::max(worst, -u[i]);
  for (std::size_t k = 0; k < sf.soc_dims.size(); ++k) {
    const auto uk = u.segment(sf.soc_offsets[k], sf.soc_dims[k]);
    worst = std::max(worst, uk.tail(uk.size() - 1).norm() - uk[0]);
  }
  if (worst >= -1e-8) u += (1.0 + std::max(worst, 0.0)) * identity_element(sf);
  return u;
}

class KktSolver {
 public:
  explicit KktSolver(const StandardForm& sf) : sf_(sf) {}

  // Factor G' W^{-2} G. Returns false if the factorization failed.
  bool factor(const Scaling& w) {
    w_ = &w;
    const int n = sf_.n;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < sf_.lp_rows; ++i) {
      const double scale = 1.0 / (w.lp_w[i] * w.lp_w[i]);
      const auto& sup = sf_.lp_support[i];
      for (int a : sup) {
        const double ga = sf_.G(i, a) * scale;
        for (int b : sup) M(a, b) += ga * sf_.G(i, b);
      }
    }
    for (std::size_t k = 0; k < sf_.soc_dims.size(); ++k) {
      const Eigen::MatrixXd& blk = sf_.soc_blocks[k];
      Eigen::VectorXd jw = w.wbar[k];
      apply_j(jw);
      // B = W^{-1} G_k = (1/beta) (2 jw (jw' G_k) - J G_k)
      Eigen::MatrixXd B = blk;
      B.row(0) *= -1.0;
      const Eigen::RowVectorXd proj = jw.transpose() * blk;
      B.noalias() += 2.0 * jw * proj;
      B /= w.beta[k];
      const Eigen::MatrixXd BtB = B.transpose() * B;
      const auto& sup = sf_.soc_support[k];
      for (std::size_t a = 0; a < sup.size(); ++a) {
        for (std::size_t b = 0; b < sup.size(); ++b) M(sup[a], sup[b]) += BtB(a, b);
      }
    }
    llt_.compute(M);
    if (llt_.info() == Eigen::Success) return true;
    const Eigen::ArrayXd diag = M.diagonal().array().abs().max(1e-300);
    for (double reg = 1e-14; reg < 1e-4; reg *= 100.0) {
      Eigen::MatrixXd Mr = M;
      Mr.diagonal().array() += reg * diag + 1e-300;
      llt_.compute(Mr);
      if (llt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  // Solves [0 G'; G -W^2] [x; z] = [bx; bz] with iterative refinement.
  void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& bz, Eigen::VectorXd& x, Eigen::VectorXd& z) const {
    solve_once(bx, bz, x, z);
    const double ref = 1.0 + std::max(bx.lpNorm<Eigen::Infinity>(), bz.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd rx, rz;
    double err = residual(bx, bz, x, z, rx, rz);
    for (int it = 0; it < 8 && err > 1e-14 * ref; ++it) {
      Eigen::VectorXd dx, dz;
      solve_once(rx, rz, dx, dz);
      const Eigen::VectorXd xn = x + dx;
      const Eigen::VectorXd zn = z + dz;
      Eigen::VectorXd rxn, rzn;
      const double errn = residual(bx, bz, xn, zn, rxn, rzn);
      if (!(errn < err)) break;
      x = xn;
      z = zn;
      rx = std::move(rxn);
      rz = std::move(rzn);
      const bool slow = errn > 0.5 * err;
      err = errn;
      if (slow) break;
    }
  }

 private:
  double residual(const Eigen::VectorXd& bx, const Eigen::VectorXd& bz, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& z, Eigen::VectorXd& rx, Eigen::VectorXd& rz) const {
    rx = bx - sf_.G.transpose() * z;
    rz = bz - (sf_.G * x - apply_w(sf_, *w_, apply_w(sf_, *w_, z, false), false));
    return std::max(rx.lpNorm<Eigen::Infinity>(), rz.lpNorm<Eigen::Infinity>());
  }

  void solve_once(const Eigen::VectorXd& bx, const Eigen::VectorXd& bz, Eigen::VectorXd& x, Eigen::VectorXd& z) const {
    const Eigen::VectorXd t = apply_w(sf_, *w_, apply_w(sf_, *w_, bz, true), true);
    x = llt_.solve(bx + sf_.G.transpose() * t);
    z = apply_w(sf_, *w_, apply_w(sf_, *w_, sf_.G * x, true), true) - t;
  }

  const StandardForm& sf_;
  const Scaling* w_ = nullptr;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

ConicSolution finish(const ConicProgram& p, SolveStatus status, const Eigen::VectorXd& x, int iters,
                     double pres, double dres, double gap, double tol) {
  ConicSolution sol;
  sol.status = status;
  sol.iterations = iters;
  sol.primal_residual = pres;
  sol.dual_residual = dres;
  sol.gap = gap;
  sol.solve_tolerance = tol;
  if (status == SolveStatus::optimal) {
    sol.primal = x.head(p.num_variables);
    sol.objective_value = p.objective.evaluate(sol.primal);
  }
  return sol;
}

}  // namespace

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings) {
  program.validate();
  const StandardForm sf = lower(program);
  const int n = sf.n;
  const int m = sf.rows();
  const double degree = sf.degree();

  if (m == 0) {
    // Only an unconstrained affine objective can reach here.
    if (sf.c.cwiseAbs().maxCoeff() > 0.0) {
      return finish(program, SolveStatus::numerical_failure, Eigen::VectorXd::Zero(n), 0, 0, 0, 0, 0);
    }
    return finish(program, SolveStatus::optimal, Eigen::VectorXd::Zero(n), 0, 0, 0, 0, 0);
  }

  const double resx0 = std::max(1.0, sf.c.norm());
  const double resz0 = std::max(1.0, sf.h.norm());
  const Eigen::VectorXd e = identity_element(sf);

  KktSolver kkt(sf);

  // Initial point from two least-squares solves with W = I.
  Eigen::VectorXd x, s, z;
  {
    Scaling unit;
    unit.lp_w = Eigen::VectorXd::Ones(sf.lp_rows);
    for (int dim : sf.soc_dims) {
      unit.beta.push_back(1.0);
      Eigen::VectorXd wb = Eigen::VectorXd::Zero(dim);
      wb[0] = 1.0;
      unit.wbar.push_back(std::move(wb));
    }
    if (!kkt.factor(unit)) {
      return finish(program, SolveStatus::numerical_failure, Eigen::VectorXd::Zero(n), 0, 0, 0, 0, 0);
    }
    Eigen::VectorXd zt;
    kkt.solve(Eigen::VectorXd::Zero(n), sf.h, x, zt);
    s = shift_into_cone(sf, -zt);
    Eigen::VectorXd xt;
    kkt.solve(-sf.c, Eigen::VectorXd::Zero(m), xt, z);
    z = shift_into_cone(sf, z);
  }
  double tau = 1.0;
  double kappa = 1.0;

  double pres = 0.0, dres = 0.0, gap = 0.0;
  Eigen::VectorXd best_x;
  double best_level = std::numeric_limits<double>::infinity();
  double best_pres = 0, best_dres = 0, best_gap = 0;

  auto fallback = [&](int iters) {
    if (best_level <= settings.reduced_tol) {
      return finish(program, SolveStatus::optimal, best_x, iters, best_pres, best_dres, best_gap,
                    settings.reduced_tol);
    }
    return finish(program, SolveStatus::numerical_failure, Eigen::VectorXd::Zero(n), iters, pres, dres,
                  gap, settings.reduced_tol);
  };

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    const Eigen::VectorXd rx = sf.G.transpose() * z + sf.c * tau;
    const Eigen::VectorXd rz = sf.G * x + s - sf.h * tau;
    const double cx = sf.c.dot(x);
    const double hz = sf.h.dot(z);
    const double rt = kappa + cx + hz;
    const double sz = s.dot(z);
    const double mu = (sz + tau * kappa) / (degree + 1.0);

    const double pcost = cx / tau;
    const double dcost = -hz / tau;
    pres = rz.norm() / tau / resz0;
    dres = rx.norm() / tau / resx0;
    gap = sz / (tau * tau);
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0) relgap = gap / -pcost;
    else if (dcost > 0.0) relgap = gap / dcost;

    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) return fallback(iter);

    const double level = std::max({pres, dres, std::min(gap, relgap)});
    if (level < best_level) {
      best_level = level;
      best_x = x / tau;
      best_pres = pres;
      best_dres = dres;
      best_gap = gap;
    }
    if (pres <= settings.feastol && dres <= settings.feastol &&
        (gap <= settings.abstol || relgap <= settings.reltol)) {
      return finish(program, SolveStatus::optimal, x / tau, iter, pres, dres, gap, settings.feastol);
    }
    if (hz < 0.0) {
      const double pinf = (sf.G.transpose() * z).norm() / resx0 / -hz;
      if (pinf <= settings.infeasibility_tol) {
        return finish(program, SolveStatus::infeasible, x, iter, pres, dres, gap, settings.infeasibility_tol);
      }
    }
    if (cx < 0.0) {
      const double dinf = (sf.G * x + s).norm() / resz0 / -cx;
      if (dinf <= settings.infeasibility_tol) {
        // Unbounded below; callers only build bounded programs.
        return finish(program, SolveStatus::numerical_failure, x, iter, pres, dres, gap,
                      settings.infeasibility_tol);
      }
    }
    if (iter == settings.max_iterations) break;

    const Scaling w = compute_scaling(sf, s, z);
    if (!kkt.factor(w)) return fallback(iter);
    const Eigen::VectorXd lambda = apply_w(sf, w, z, false);
    const Eigen::VectorXd lambda_sq = jordan(sf, lambda, lambda);

    Eigen::VectorXd x1, z1;
    kkt.solve(-sf.c, sf.h, x1, z1);
    const double denom_base = sf.c.dot(x1) + sf.h.dot(z1) - kappa / tau;

    struct Direction {
      Eigen::VectorXd dx, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](double sigma, const Eigen::VectorXd& rc, double rk) {
      Direction d;
      const Eigen::VectorXd ds_scaled = jordan_solve(sf, lambda, rc);
      Eigen::VectorXd x2, z2;
      kkt.solve(-(1.0 - sigma) * rx, -(1.0 - sigma) * rz - apply_w(sf, w, ds_scaled, false), x2, z2);
      d.dtau = (-(1.0 - sigma) * rt - sf.c.dot(x2) - sf.h.dot(z2) - rk / tau) / denom_base;
      d.dx = x2 + d.dtau * x1;
      d.dz = z2 + d.dtau * z1;
      d.ds = -(1.0 - sigma) * rz - sf.G * d.dx + sf.h * d.dtau;
      d.dkappa = (rk - kappa * d.dtau) / tau;
      return d;
    };
    auto step_length = [&](const Direction& d) {
      double a = std::min(max_step(sf, s, d.ds), max_step(sf, z, d.dz));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    // Predictor.
    const Direction aff = direction(0.0, -lambda_sq, -kappa * tau);
    const double alpha_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    // Corrector with the second-order term.
    const Eigen::VectorXd ds_aff_scaled = apply_w(sf, w, aff.ds, true);
    const Eigen::VectorXd dz_aff_scaled = apply_w(sf, w, aff.dz, false);
    const Eigen::VectorXd rc = -lambda_sq + sigma * mu * e - jordan(sf, ds_aff_scaled, dz_aff_scaled);
    const double rk = -kappa * tau + sigma * mu - aff.dtau * aff.dkappa;
    const Direction d = direction(sigma, rc, rk);
    const double alpha = std::min(1.0, 0.99 * step_length(d));
    if (!(alpha > 1e-10)) return fallback(iter);

    x += alpha * d.dx;
    s += alpha * d.ds;
    z += alpha * d.dz;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
  }
  return fallback(settings.max_iterations);
}

void dump_program(std::ostream& out, const ConicProgram& p) {
  auto name = [&](int v) {
    return v < static_cast<int>(p.variable_names.size()) && !p.variable_names[v].empty()
               ? p.variable_names[v]
               : "x" + std::to_string(v);
  };
  auto expr = [&](const AffineExpr& e) {
    std::string s;
    for (const auto& [v, a] : e.terms) s += (a < 0 ? " - " : " + ") + std::to_string(std::abs(a)) + "*" + name(v);
    s += (e.constant < 0 ? " - " : " + ") + std::to_string(std::abs(e.constant));
    return s;
  };
  out << "variables " << p.num_variables << "\n";
  out << "minimize";
  for (int i = 0; i < p.objective.linear.size(); ++i) {
    if (p.objective.linear[i] != 0.0) out << " + " << p.objective.linear[i] << "*" << name(i);
  }
  out << " + " << p.objective.constant;
  if (p.objective.quadratic.size() > 0) out << " + x'Qx (Q " << p.objective.quadratic.rows() << "x"
                                            << p.objective.quadratic.cols() << ")";
  out << "\n";
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& label = p.constraint_labels[i];
    out << (label.empty() ? "c" + std::to_string(i) : label) << ": ";
    const auto& c = p.constraints[i];
    if (const auto* a = std::get_if<AffineInequality>(&c)) {
      out << expr(a->expr) << " <= 0\n";
    } else if (const auto* s = std::get_if<SecondOrderCone>(&c)) {
      out << "|| " << s->tail.size() << " terms || <=" << expr(s->head) << "\n";
      for (const auto& t : s->tail) out << "    term" << expr(t) << "\n";
    } else {
      const auto& q = std::get<QuadraticVsAffine>(c);
      out << "sum of " << q.terms.size() << " squares <=" << expr(q.bound) << "\n";
      for (const auto& t : q.terms) out << "    term" << expr(t) << "\n";
    }
  }
}

}  // namespace urllc::conic
