#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "urllc/channel.hpp"
#include "urllc/embedding.hpp"
#include "urllc/min_power.hpp"
#include "oracles.hpp"

using namespace urllc;
using cd = std::complex<double>;

namespace {

Eigen::VectorXcd gaussian_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(g(rng), g(rng));
  return v;
}

}  // namespace

TEST_CASE("single user needs gamma / ||h||^2") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = ChannelRealization::from_channels({gaussian_vector(rng, 4)}, {1.0});
    const std::vector<double> gt{5.05};
    const UserSet s{0};
    const auto res = min_power_feasible(r, s, gt, 1e3);
    REQUIRE(res.feasible);
    const double expected = gt[0] / r.normalized_channels[0].squaredNorm();
    CHECK(std::abs(res.power - expected) <= 1e-6 * std::max(1.0, expected));
    CHECK(sinr(res.weights, r, s, 0) >= gt[0] * (1.0 - 1e-7));
  }
}

TEST_CASE("orthogonal users decouple") {
  Eigen::VectorXcd h0(3), h1(3);
  h0 << cd(1.0, 1.0), cd(0.0, 0.0), cd(0.5, 0.0);
  h1 << cd(0.0, 0.0), cd(2.0, -1.0), cd(0.0, 0.0);
  const auto r = ChannelRealization::from_channels({h0, h1}, {1.0, 1.0});
  const std::vector<double> gt{3.0, 7.0};
  const UserSet s{0, 1};
  const auto res = min_power_feasible(r, s, gt, 100.0);
  REQUIRE(res.feasible);
  const double expected = 3.0 / h0.squaredNorm() + 7.0 / h1.squaredNorm();
  CHECK(std::abs(res.power - expected) <= 1e-6);
}

TEST_CASE("returned beams meet every target and the received phase is real") {
  NetworkConfig c;
  c.snr_db = 30.0;
  const auto r = draw_channels(c, 5);
  const std::vector<double> gt(c.num_users, 2.0);
  const UserSet s{0, 2, 5};
  const auto res = min_power_feasible(r, s, gt, c.power_budget());
  if (!res.feasible) return;
  for (int k : s) {
    CHECK(sinr(res.weights, r, s, k) >= 2.0 * (1.0 - 1e-7));
    const cd g = r.normalized_channels[k].dot(res.weights[k]);
    CHECK(std::abs(g.imag()) <= 1e-9 * std::max(1.0, std::abs(g)));
  }
  for (int k : {1, 3, 4, 6, 7}) CHECK(res.weights[k].norm() == 0.0);
  CHECK(res.power == doctest::Approx(total_power(res.weights, s)));
}

TEST_CASE("two users on two antennas agree with a direction search") {
  std::mt19937_64 rng(11);
  int compared = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = ChannelRealization::from_channels({gaussian_vector(rng, 2), gaussian_vector(rng, 2)}, {1.0, 1.0});
    const std::vector<double> gt{1.5, 1.5};
    const UserSet s{0, 1};
    const double oracle = oracle::two_user_min_power(r, gt[0]);
    const auto res = min_power_feasible(r, s, gt, 1e4);
    CAPTURE(trial);
    if (!std::isfinite(oracle)) {
      CHECK_FALSE(res.feasible);
      continue;
    }
    REQUIRE(res.feasible);
    CHECK(std::abs(res.power - oracle) <= 0.01 * oracle);
    CHECK(res.power <= oracle * (1.0 + 1e-6));
    ++compared;
  }
  CHECK(compared >= 15);
}

TEST_CASE("adding a user never lowers the required power") {
  NetworkConfig c;
  c.snr_db = 40.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = draw_channels(c, seed);
    const std::vector<double> gt(c.num_users, 1.0);
    const UserSet small{0, 1};
    const UserSet big{0, 1, 2};
    const auto a = min_power_feasible(r, small, gt, c.power_budget());
    const auto b = min_power_feasible(r, big, gt, c.power_budget());
    if (b.feasible) {
      REQUIRE(a.feasible);
      CHECK(b.power >= a.power * (1.0 - 1e-7));
    }
  }
}

TEST_CASE("budget decides feasibility") {
  Eigen::VectorXcd h(2);
  h << cd(1.0, 0.0), cd(0.0, 0.0);
  const auto r = ChannelRealization::from_channels({h}, {1.0});
  const UserSet s{0};
  CHECK(min_power_feasible(r, s, std::vector<double>{4.0}, 4.0 + 1e-6).feasible);
  CHECK_FALSE(min_power_feasible(r, s, std::vector<double>{4.0}, 3.9).feasible);
  CHECK_FALSE(min_power_feasible(r, s, std::vector<double>{40.0}, 3.9).feasible);
}

TEST_CASE("embedding helpers") {
  Eigen::VectorXcd h(2), w(2);
  h << cd(1.0, 2.0), cd(-0.5, 0.25);
  w << cd(0.3, -1.0), cd(2.0, 0.5);
  const InnerProductForms f(h);
  const Eigen::VectorXd x = embed(w);
  const cd ip = h.dot(w);
  CHECK(f.re.dot(x) == doctest::Approx(ip.real()));
  CHECK(f.im.dot(x) == doctest::Approx(ip.imag()));
  CHECK(f.abs_sq(x) == doctest::Approx(std::norm(ip)));
  CHECK((unembed(x) - w).norm() == 0.0);
  CHECK(real_inner(embed(h), x) == doctest::Approx(ip.real()));
}
