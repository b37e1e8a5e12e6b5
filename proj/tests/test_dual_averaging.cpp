#include "grhmc/dual_averaging.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace grhmc;

namespace {

// log S after k updates with a constant residual c, written out directly
double constant_residual_iterate(double mu, double gamma, double k0, double c, int k) {
  return mu - std::sqrt(k) / gamma * (k * c / (k + k0));
}

}  // namespace

TEST_CASE("observations at the target leave the iterate at the anchor") {
  DualAveraging da({0.7, 10.0, 10.0, 0.75}, std::numbers::pi);
  for (int k = 0; k < 50; ++k) {
    CHECK(da.update(std::numbers::pi) == 0.7);
    CHECK(da.averaged() == doctest::Approx(0.7).epsilon(1e-15));
  }
  CHECK(da.iterations() == 50);
  CHECK(da.residual_sum() == 0.0);
}

TEST_CASE("first update with unit residual") {
  const double mu = 0.25;
  DualAveraging da({mu, 10.0, 10.0, 0.75}, 2.0);
  const double log_s = da.update(1.0);  // H = 2 - 1 = 1
  CHECK(log_s == doctest::Approx(mu - 1.0 / 110.0).epsilon(1e-15));
  // eta_1 = 1, so the averaged iterate equals the first iterate
  CHECK(da.averaged() == log_s);
}

TEST_CASE("constant residual matches the closed form") {
  const double mu = -0.3, gamma = 25.0, k0 = 10.0, c = 0.4;
  DualAveraging da({mu, gamma, k0, 0.75}, 1.0);
  for (int k = 1; k <= 200; ++k) {
    const double got = da.update(1.0 - c);
    REQUIRE(got == doctest::Approx(constant_residual_iterate(mu, gamma, k0, c, k)).epsilon(1e-12));
  }
}

TEST_CASE("averaging weights") {
  DualAveraging da({0.0, 10.0, 10.0, 0.75}, 1.0);
  double avg = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double x = da.update(k % 3 == 0 ? 2.5 : 0.1);
    const double eta = std::pow(k, -0.75);
    avg = eta * x + (1.0 - eta) * avg;
    REQUIRE(da.averaged() == doctest::Approx(avg).epsilon(1e-14));
  }
}

TEST_CASE("converges where the mean interval equals the target") {
  // crossing interval of a Gaussian with SD sigma under scale S is pi sigma / S
  const double sigma = 3.0;
  DualAveraging da({0.0, 10.0, 10.0, 0.75}, std::numbers::pi);
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> noise(1.0);
  double prev = 0.0, spread = 0.0;
  const int n = 200000;
  for (int k = 1; k <= n; ++k) {
    const double s = std::exp(da.iterate());
    da.update(std::numbers::pi * sigma / s * noise(rng));
    if (k > n - 100) spread = std::max(spread, std::abs(da.averaged() - prev));
    prev = da.averaged();
  }
  CHECK(spread <= 1e-3);
  CHECK(std::exp(da.averaged()) == doctest::Approx(sigma).epsilon(0.05));
}

TEST_CASE("restart returns to the new anchor") {
  DualAveraging da({0.0, 10.0, 10.0, 0.75}, 1.0);
  for (int k = 0; k < 10; ++k) da.update(0.3);
  da.restart({1.1 * std::log(2.0), 25.0, 10.0, 0.75});
  CHECK(da.iterations() == 0);
  CHECK(da.residual_sum() == 0.0);
  CHECK(da.iterate() == 1.1 * std::log(2.0));
  CHECK(da.averaged() == 1.1 * std::log(2.0));
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(DualAveraging({0.0, 0.0, 10.0, 0.75}), std::invalid_argument);
  CHECK_THROWS_AS(DualAveraging({0.0, 10.0, -1.0, 0.75}), std::invalid_argument);
  CHECK_THROWS_AS(DualAveraging({0.0, 10.0, 10.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DualAveraging({0.0, 10.0, 10.0, 1.5}), std::invalid_argument);
}
