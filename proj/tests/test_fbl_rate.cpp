#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "urllc/fbl_rate.hpp"
#include "oracles.hpp"

using namespace urllc;

TEST_CASE("q_inv matches a bisection oracle") {
  CHECK(std::abs(q_inv(1e-6) - 4.753424) < 1e-5);
  CHECK(std::abs(q_inv(1e-6) - static_cast<double>(oracle::q_inv(1e-6L))) < 1e-9);
  for (double p : {1e-12, 1e-9, 1e-7, 1e-5, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.99}) {
    CAPTURE(p);
    CHECK(std::abs(q_inv(p) - static_cast<double>(oracle::q_inv(p))) < 1e-9);
  }
  CHECK(q_inv(0.5) == doctest::Approx(0.0).scale(1));
}

TEST_CASE("q_inv rejects values outside (0, 1)") {
  CHECK_THROWS_AS(q_inv(0.0), std::domain_error);
  CHECK_THROWS_AS(q_inv(1.0), std::domain_error);
  CHECK_THROWS_AS(q_inv(-0.1), std::domain_error);
}

TEST_CASE("q_func and q_inv are inverse") {
  for (double x : {-3.0, -0.5, 0.0, 1.0, 2.5, 4.75, 6.0}) {
    CAPTURE(x);
    CHECK(q_inv(q_func(x)) == doctest::Approx(x).epsilon(1e-10).scale(1));
  }
}

TEST_CASE("dispersion values") {
  CHECK(v_of(0.0) == 0.0);
  CHECK(v_of(1.0) == doctest::Approx(0.75));
  CHECK(v_of(3.0) == doctest::Approx(15.0 / 16.0));
  CHECK(v_of(1e9) == doctest::Approx(1.0));
}

TEST_CASE("rate at gamma = 3, eps = 1e-6, n = 128") {
  const auto p = FblParams::make(1e-6, 128, 256);
  const double expected = static_cast<double>(oracle::rate(3.0L, 1e-6L, 128.0L));
  CHECK(rate(3.0, p) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(rate(3.0, p) - 0.979488) < 1e-6);
  CHECK(rate(0.0, p) == 0.0);
}

TEST_CASE("derived parameters") {
  const auto p = FblParams::make(1e-6, 128, 256);
  CHECK(p.rate_target_nats == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(p.theta == doctest::Approx(static_cast<double>(oracle::q_inv(1e-6L)) / std::sqrt(128.0)));
  CHECK_THROWS_AS(FblParams::make(0.0, 128, 256), std::domain_error);
  CHECK_THROWS_AS(FblParams::make(0.6, 128, 256), std::domain_error);
  CHECK_THROWS_AS(FblParams::make(1e-6, 0, 256), std::domain_error);
  CHECK_THROWS_AS(FblParams::make(1e-6, 128, -1), std::domain_error);
}

TEST_CASE("minimum SINR for the default link") {
  const auto p = FblParams::make(1e-6, 128, 256);
  const double g = min_sinr(p);
  CHECK(g >= 5.0);
  CHECK(g <= 5.1);
  CHECK(std::abs(rate(g, p) - p.rate_target_nats) <= 1e-9);
  CHECK(g > shannon_min_sinr(p));
}

TEST_CASE("Shannon threshold") {
  CHECK(shannon_threshold(256, 128) == 3.0);
  CHECK(shannon_threshold(0, 128) == 0.0);
  CHECK(shannon_threshold(128, 128) == 1.0);
  const auto p = FblParams::make(0.5, 128, 256);
  CHECK(p.theta == doctest::Approx(0.0).scale(1));
  CHECK(min_sinr(p) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(min_sinr(0.0, std::log(4.0)) == 3.0);
}

TEST_CASE("round trip and ordering over random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_eps(-12.0, -1.0);
  std::uniform_int_distribution<int> n_dist(16, 2048);
  std::uniform_int_distribution<int> d_dist(8, 1024);
  for (int i = 0; i < 500; ++i) {
    const auto p = FblParams::make(std::pow(10.0, log_eps(rng)), n_dist(rng), d_dist(rng));
    CAPTURE(p.epsilon);
    CAPTURE(p.blocklength_n);
    CAPTURE(p.data_bits_D);
    const double g = min_sinr(p);
    CHECK(std::abs(rate(g, p) - p.rate_target_nats) <= 1e-9);
    CHECK(g >= shannon_min_sinr(p));
    CHECK(rate(g * 1.01, p) > p.rate_target_nats);
  }
}

TEST_CASE("minimum SINR falls as epsilon and n grow") {
  double prev = 1e300;
  for (double eps : {1e-9, 1e-7, 1e-6, 1e-5, 1e-3}) {
    const double g = min_sinr(FblParams::make(eps, 128, 256));
    CHECK(g < prev);
    prev = g;
  }
  // Fixed D/n ratio: longer blocks need less margin.
  prev = 1e300;
  for (int n : {64, 128, 256, 512}) {
    const double g = min_sinr(FblParams::make(1e-6, n, 2 * n));
    CHECK(g < prev);
    prev = g;
  }
}
