#include "urllc/fbl_rate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace urllc {

FblParams FblParams::make(double epsilon, std::int64_t blocklength_n, std::int64_t data_bits_D) {
  if (!(epsilon > 0.0 && epsilon <= 0.5)) {
    throw std::domain_error("epsilon must lie in (0, 0.5], got " + std::to_string(epsilon));
  }
  if (blocklength_n <= 0) throw std::domain_error("blocklength must be positive");
  if (data_bits_D <= 0) throw std::domain_error("data size must be positive");

  FblParams p;
  p.epsilon = epsilon;
  p.blocklength_n = blocklength_n;
  p.data_bits_D = data_bits_D;
  // Q^{-1}(0.5) is exactly zero; avoid a rounding residue there.
  p.theta = epsilon == 0.5 ? 0.0 : q_inv(epsilon) / std::sqrt(static_cast<double>(blocklength_n));
  p.rate_target_nats =
      static_cast<double>(data_bits_D) / static_cast<double>(blocklength_n) * std::numbers::ln2;
  return p;
}

double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace {

// Acklam's rational approximation of the lower-tail normal quantile,
// relative error about 1.15e-9; refined below.
double normal_quantile_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("q_inv: probability must lie in (0, 1), got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  // Work in the upper tail where erfc keeps full relative precision, then
  // mirror: Q(-x) = 1 - Q(x).
  const bool upper = p < 0.5;
  const double tail = upper ? p : 1.0 - p;

  // Q(x) = tail  <=>  Phi(-x) = tail.
  double x = -normal_quantile_guess(tail);
  for (int i = 0; i < 3; ++i) {
    const double err = q_func(x) - tail;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf == 0.0) break;
    // Halley step on f(x) = Q(x) - tail, f' = -pdf, f'' = x * pdf.
    const double newton = err / pdf;
    x += newton / (1.0 + 0.5 * x * newton);
  }
  return upper ? x : -x;
}

double v_of(double gamma) {
  if (!(gamma >= 0.0)) throw std::domain_error("v_of: SINR must be non-negative");
  const double inv = 1.0 / (1.0 + gamma);
  return 1.0 - inv * inv;
}

double rate(double gamma, double theta) {
  if (!(gamma >= 0.0)) throw std::domain_error("rate: SINR must be non-negative");
  return std::log1p(gamma) - theta * std::sqrt(v_of(gamma));
}

double rate(double gamma, const FblParams& params) { return rate(gamma, params.theta); }

double min_sinr(double theta, double rate_target_nats) {
  if (!(rate_target_nats > 0.0)) throw std::domain_error("min_sinr: rate target must be positive");
  const double shannon = std::expm1(rate_target_nats);
  if (theta == 0.0) return shannon;

  // rate() is below the target at the Shannon threshold and increasing above it.
  double lo = shannon;
  double hi = 2.0 * shannon + 1.0;
  while (rate(hi, theta) < rate_target_nats) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::domain_error("min_sinr: no bracket found");
  }
  for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rate(mid, theta) < rate_target_nats) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double min_sinr(const FblParams& params) { return min_sinr(params.theta, params.rate_target_nats); }

double shannon_threshold(std::int64_t data_bits_D, std::int64_t blocklength_n) {
  if (blocklength_n <= 0) throw std::domain_error("blocklength must be positive");
  if (data_bits_D < 0) throw std::domain_error("data size must be non-negative");
  return std::exp2(static_cast<double>(data_bits_D) / static_cast<double>(blocklength_n)) - 1.0;
}

double shannon_min_sinr(const FblParams& params) {
  return shannon_threshold(params.data_bits_D, params.blocklength_n);
}

}  // namespace urllc
