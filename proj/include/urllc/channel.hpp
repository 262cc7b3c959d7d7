#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace urllc {

using UserSet = std::vector<int>;
using Beams = std::vector<Eigen::VectorXcd>;

struct NetworkConfig {
  int num_antennas = 4;
  int num_users = 8;
  double cell_radius_m = 300.0;
  double ref_distance_m = 30.0;
  double pathloss_exponent = 3.0;
  double noise_sigma = 1.0;
  double snr_db = 10.0;

  /// P = sigma^2 * 10^(snr_db / 10).
  double power_budget() const;
  /// Throws std::invalid_argument on a malformed configuration.
  void validate() const;
};

/// Large-scale power gain 1 / (1 + (d / d0)^rho).
double pathloss_gain(double distance_m, double ref_distance_m, double exponent);

struct ChannelRealization {
  std::vector<Eigen::VectorXcd> channels;
  std::vector<Eigen::VectorXcd> normalized_channels;  // channels[k] / noise_sigmas[k]
  std::vector<double> distances_m;
  std::vector<std::array<double, 2>> positions_m;
  std::vector<double> noise_sigmas;

  int num_users() const { return static_cast<int>(channels.size()); }
  int num_antennas() const { return channels.empty() ? 0 : static_cast<int>(channels.front().size()); }

  /// Builds a realization from raw channels, filling the normalized copies.
  static ChannelRealization from_channels(std::vector<Eigen::VectorXcd> channels,
                                          std::vector<double> noise_sigmas,
                                          std::vector<std::array<double, 2>> positions_m = {});
};

/// Uniform drop over the cell disk (1 m exclusion), i.i.d. CN(0, 1) small-scale
/// fading scaled by the path-loss gain. Bit-identical for a fixed seed on any
/// platform: the generator is std::mt19937_64 and all distribution transforms
/// are done here rather than by <random> distributions.
ChannelRealization draw_channels(const NetworkConfig& config, std::uint64_t seed);

/// Downlink SINR of user k when the users in `active` transmit with `weights`.
/// Throws std::domain_error when k is not in `active`.
double sinr(const Beams& weights, const ChannelRealization& realization,
            std::span<const int> active, int k);

/// Sum of squared beam norms over `active`.
double total_power(const Beams& weights, std::span<const int> active);

UserSet all_users(int num_users);

}  // namespace urllc
