#pragma once

#include <Eigen/Dense>

namespace urllc {

/// [Re w; Im w].
Eigen::VectorXd embed(const Eigen::VectorXcd& w);
Eigen::VectorXcd unembed(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Real linear forms of the inner product h^H w in embedded coordinates:
/// Re(h^H w) = re . x and Im(h^H w) = im . x with x = embed(w).
struct InnerProductForms {
  Eigen::VectorXd re;
  Eigen::VectorXd im;

  explicit InnerProductForms(const Eigen::VectorXcd& h);

  double abs_sq(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Re(a^H b) as a bilinear form of the embeddings: embed(a) . embed(b).
double real_inner(const Eigen::VectorXd& a_embedded, const Eigen::VectorXd& b_embedded);

}  // namespace urllc
