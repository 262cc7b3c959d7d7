#include "urllc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace urllc {

double NetworkConfig::power_budget() const {
  return noise_sigma * noise_sigma * std::pow(10.0, snr_db / 10.0);
}

void NetworkConfig::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("number of antennas must be >= 1");
  if (num_users < 1) throw std::invalid_argument("number of users must be >= 1");
  if (!(cell_radius_m > 1.0)) throw std::invalid_argument("cell radius must exceed 1 m");
  if (!(ref_distance_m > 0.0)) throw std::invalid_argument("reference distance must be positive");
  if (!(pathloss_exponent > 0.0)) throw std::invalid_argument("path-loss exponent must be positive");
  if (!(noise_sigma > 0.0)) throw std::invalid_argument("noise sigma must be positive");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("SNR must be finite");
}

double pathloss_gain(double distance_m, double ref_distance_m, double exponent) {
  return 1.0 / (1.0 + std::pow(distance_m / ref_distance_m, exponent));
}

ChannelRealization ChannelRealization::from_channels(std::vector<Eigen::VectorXcd> channels,
                                                     std::vector<double> noise_sigmas,
                                                     std::vector<std::array<double, 2>> positions_m) {
  if (channels.size() != noise_sigmas.size()) {
    throw std::invalid_argument("one noise level per channel is required");
  }
  ChannelRealization r;
  r.positions_m = std::move(positions_m);
  if (r.positions_m.empty()) r.positions_m.assign(channels.size(), {0.0, 0.0});
  if (r.positions_m.size() != channels.size()) {
    throw std::invalid_argument("one position per channel is required");
  }
  for (std::size_t k = 0; k < channels.size(); ++k) {
    if (!(noise_sigmas[k] > 0.0)) throw std::invalid_argument("noise sigma must be positive");
    if (channels[k].size() != channels.front().size()) {
      throw std::invalid_argument("all channels must have the same antenna count");
    }
    r.normalized_channels.push_back(channels[k] / noise_sigmas[k]);
    const auto& p = r.positions_m[k];
    r.distances_m.push_back(std::hypot(p[0], p[1]));
  }
  r.channels = std::move(channels);
  r.noise_sigmas = std::move(noise_sigmas);
  return r;
}

namespace {

class Uniform01 {
 public:
  explicit Uniform01(std::uint64_t seed) : engine_(seed) {}
  // 53 random mantissa bits in (0, 1).
  double operator()() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

ChannelRealization draw_channels(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Uniform01 uniform(seed);
  const int K = config.num_users;
  const int Nt = config.num_antennas;
  const double r_min = 1.0;
  const double r_max = config.cell_radius_m;

  std::vector<Eigen::VectorXcd> channels;
  std::vector<std::array<double, 2>> positions;
  channels.reserve(K);
  positions.reserve(K);
  for (int k = 0; k < K; ++k) {
    // Area-uniform radius on the annulus [r_min, r_max].
    const double radius = std::sqrt(r_min * r_min + uniform() * (r_max * r_max - r_min * r_min));
    const double angle = 2.0 * std::numbers::pi * uniform();
    positions.push_back({radius * std::cos(angle), radius * std::sin(angle)});

    const double amplitude =
        std::sqrt(pathloss_gain(radius, config.ref_distance_m, config.pathloss_exponent));
    Eigen::VectorXcd h(Nt);
    for (int j = 0; j < Nt; ++j) {
      // Box-Muller; each component N(0, 1/2) so E|h|^2 = 1.
      const double u1 = uniform();
      const double u2 = uniform();
      const double mag = std::sqrt(-std::log(u1));
      const double phase = 2.0 * std::numbers::pi * u2;
      h[j] = amplitude * std::complex<double>(mag * std::cos(phase), mag * std::sin(phase));
    }
    channels.push_back(std::move(h));
  }
  auto r = ChannelRealization::from_channels(std::move(channels),
                                             std::vector<double>(K, config.noise_sigma),
                                             std::move(positions));
  return r;
}

double sinr(const Beams& weights, const ChannelRealization& realization,
            std::span<const int> active, int k) {
  if (std::find(active.begin(), active.end(), k) == active.end()) {
    throw std::domain_error("sinr: user " + std::to_string(k) + " is not in the active set");
  }
  const Eigen::VectorXcd& h = realization.normalized_channels.at(k);
  const double signal = std::norm(h.dot(weights.at(k)));
  double interference = 0.0;
  for (int l : active) {
    if (l != k) interference += std::norm(h.dot(weights.at(l)));
  }
  return signal / (interference + 1.0);
}

double total_power(const Beams& weights, std::span<const int> active) {
  double p = 0.0;
  for (int k : active) p += weights.at(k).squaredNorm();
  return p;
}

UserSet all_users(int num_users) {
  UserSet s(num_users);
  for (int k = 0; k < num_users; ++k) s[k] = k;
  return s;
}

}  // namespace urllc
