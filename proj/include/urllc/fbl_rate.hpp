#pragma once

#include <cstdint>

namespace urllc {

/// Reliability/latency parameters of one short-packet link.
///
/// `theta` is Q^{-1}(epsilon)/sqrt(n) and `rate_target_nats` is (D/n)*ln 2,
/// i.e. the payload is read as bits per channel use and converted to nats so
/// that exp(r) - 1 == 2^(D/n) - 1.
struct FblParams {
  double epsilon = 1e-6;
  std::int64_t blocklength_n = 128;
  std::int64_t data_bits_D = 256;
  double theta = 0.0;
  double rate_target_nats = 0.0;

  /// Validates and fills the derived fields. Throws std::domain_error.
  static FblParams make(double epsilon, std::int64_t blocklength_n, std::int64_t data_bits_D);
};

/// Gaussian upper-tail probability Q(x) = 0.5 * erfc(x / sqrt 2).
double q_func(double x);

/// Inverse of Q on (0, 1). Throws std::domain_error outside that interval.
double q_inv(double p);

/// Channel dispersion 1 - (1 + gamma)^-2.
double v_of(double gamma);

/// Normal-approximation rate ln(1 + gamma) - theta * sqrt(V(gamma)), in nats.
double rate(double gamma, const FblParams& params);
double rate(double gamma, double theta);

/// Smallest SINR above the Shannon threshold whose rate reaches the target.
double min_sinr(const FblParams& params);
double min_sinr(double theta, double rate_target_nats);

/// 2^(D/n) - 1.
double shannon_min_sinr(const FblParams& params);
double shannon_threshold(std::int64_t data_bits_D, std::int64_t blocklength_n);

}  // namespace urllc
