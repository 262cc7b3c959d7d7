#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace urllc::conic {

/// sum_i coef_i * x[var_i] + constant.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}

  AffineExpr& add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
    return *this;
  }
  double evaluate(const Eigen::VectorXd& x) const;
};

/// expr <= 0
struct AffineInequality {
  AffineExpr expr;
};

/// ||tail||_2 <= head
struct SecondOrderCone {
  std::vector<AffineExpr> tail;
  AffineExpr head;
};

/// sum_i terms_i^2 <= bound
struct QuadraticVsAffine {
  std::vector<AffineExpr> terms;
  AffineExpr bound;
};

using Constraint = std::variant<AffineInequality, SecondOrderCone, QuadraticVsAffine>;

/// Signed violation: positive when the constraint does not hold.
double violation(const Constraint& c, const Eigen::VectorXd& x);

/// x' Q x + q' x + constant, Q symmetric positive semidefinite. An empty Q
/// means a purely affine objective.
struct QuadraticObjective {
  Eigen::MatrixXd quadratic;
  Eigen::VectorXd linear;
  double constant = 0.0;

  double evaluate(const Eigen::VectorXd& x) const;
};

struct ConicProgram {
  int num_variables = 0;
  std::vector<std::string> variable_names;
  QuadraticObjective objective;
  std::vector<Constraint> constraints;
  std::vector<std::string> constraint_labels;

  explicit ConicProgram(int n = 0);

  void add(Constraint c, std::string label = {});
  /// Throws std::invalid_argument if an index is out of range, sizes
  /// disagree, or the quadratic part is not positive semidefinite.
  void validate() const;
  double max_violation(const Eigen::VectorXd& x) const;
};

enum class SolveStatus { optimal, infeasible, numerical_failure };

const char* to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd primal;
  double objective_value = 0.0;
  /// Residual level the reported point was accepted at.
  double solve_tolerance = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

struct SolverSettings {
  double feastol = 1e-9;
  double abstol = 1e-9;
  double reltol = 1e-9;
  /// Accepted when progress stalls before the targets above are met.
  double reduced_tol = 1e-7;
  double infeasibility_tol = 1e-8;
  int max_iterations = 100;
};

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings = {});

/// Human-readable listing of the program, one constraint per line.
void dump_program(std::ostream& out, const ConicProgram& program);

}  // namespace urllc::conic
