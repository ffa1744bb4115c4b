#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "advi/math.hpp"
#include "oracles.hpp"

using advi::math::digamma;
using advi::math::log_sum_exp;

TEST_CASE("lgamma matches the standard library across the domain") {
  using advi::math::lgamma;  // block scope: the libc ::lgamma stays hidden
  // log-spaced sweep plus the integers, where Gamma(n) = (n-1)! exactly.
  for (double x = 1e-8; x < 1e8; x *= 1.7) {
    CHECK(lgamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-10));
  }
  CHECK(lgamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(lgamma(2.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(lgamma(3.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(lgamma(6.0) == doctest::Approx(std::log(120.0)).epsilon(1e-12));
  CHECK(lgamma(0.5) == doctest::Approx(0.5 * std::log(advi::math::pi()))
                           .epsilon(1e-12));
}

TEST_CASE("digamma matches finite differences of lgamma") {
  for (double x : {0.03, 0.2, 0.9, 1.0, 2.5, 7.0, 11.0, 123.0, 4567.0}) {
    const double fd = oracle::fd_derivative(
        [](double v) { return std::lgamma(v); }, x, 1e-7);
    CHECK(digamma(x) == doctest::Approx(fd).epsilon(1e-6));
  }
  // Known values: psi(1) = -gamma_Euler, psi(0.5) = -gamma - 2 log 2.
  const double euler = 0.57721566490153286061;
  CHECK(digamma(1.0) == doctest::Approx(-euler).epsilon(1e-12));
  CHECK(digamma(0.5) ==
        doctest::Approx(-euler - 2.0 * std::log(2.0)).epsilon(1e-12));
  // Recurrence psi(x+1) = psi(x) + 1/x.
  for (double x : {0.1, 0.77, 3.3, 9.9}) {
    CHECK(digamma(x + 1.0) ==
          doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-12));
  }
}

TEST_CASE("log_sum_exp is translation stable") {
  std::mt19937_64 engine(11);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(7);
    for (double& v : x) v = unif(engine);
    const double base = log_sum_exp(x);
    for (double c : {-700.0, -1.0, 0.5, 300.0, 700.0}) {
      std::vector<double> shifted = x;
      for (double& v : shifted) v += c;
      CHECK(log_sum_exp(shifted) - c == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("log_sum_exp handles degenerate inputs") {
  const std::vector<double> single = {3.25};
  CHECK(log_sum_exp(single) == doctest::Approx(3.25));
  const std::vector<double> pair = {0.0, 0.0};
  CHECK(log_sum_exp(pair) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(log_sum_exp(10.0, -std::numeric_limits<double>::infinity()) ==
        doctest::Approx(10.0));
}

TEST_CASE("stable scalar helpers agree with naive formulas in safe range") {
  for (double x : {-30.0, -3.0, -0.1, 0.0, 0.1, 3.0, 30.0}) {
    CHECK(advi::math::log1p_exp(x) ==
          doctest::Approx(std::log1p(std::exp(x))).epsilon(1e-14));
    CHECK(advi::math::logistic(x) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-x))).epsilon(1e-14));
    CHECK(advi::math::log_logistic(x) ==
          doctest::Approx(std::log(advi::math::logistic(x))).epsilon(1e-12));
  }
  // No overflow at extreme arguments.
  CHECK(advi::math::log1p_exp(800.0) == doctest::Approx(800.0));
  CHECK(advi::math::log1p_exp(-800.0) == doctest::Approx(0.0));
  CHECK(advi::math::logistic(1000.0) == doctest::Approx(1.0));
  CHECK(advi::math::logistic(-1000.0) == doctest::Approx(0.0));
}
