#include "urllc/embedding.hpp"

namespace urllc {

Eigen::VectorXd embed(const Eigen::VectorXcd& w) {
  const Eigen::Index n = w.size();
  Eigen::VectorXd x(2 * n);
  x.head(n) = w.real();
  x.tail(n) = w.imag();
  return x;
}

Eigen::VectorXcd unembed(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size() / 2;
  Eigen::VectorXcd w(n);
  w.real() = x.head(n);
  w.imag() = x.tail(n);
  return w;
}

InnerProductForms::InnerProductForms(const Eigen::VectorXcd& h) {
  const Eigen::Index n = h.size();
  // h^H w = sum (hr - i hi)(wr + i wi)
  re.resize(2 * n);
  im.resize(2 * n);
  re.head(n) = h.real();
  re.tail(n) = h.imag();
  im.head(n) = -h.imag();
  im.tail(n) = h.real();
}

double InnerProductForms::abs_sq(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double a = re.dot(x);
  const double b = im.dot(x);
  return a * a + b * b;
}

double real_inner(const Eigen::VectorXd& a_embedded, const Eigen::VectorXd& b_embedded) {
  return a_embedded.dot(b_embedded);
}

}  // namespace urllc
