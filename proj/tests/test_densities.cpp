#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "advi/autodiff.hpp"
#include "advi/densities.hpp"
#include "oracles.hpp"

namespace {

/** Integral of exp(log_pdf) over (0, inf) in log space: x = e^t.  The
 *  substitution removes endpoint singularities for shapes below one. */
double positive_density_mass(const std::function<double(double)>& log_pdf,
                             double upper) {
  const std::vector<double> knots = {-60.0, -20.0, -5.0, -1.0, 0.0,
                                     1.0,   2.5,   std::log(upper)};
  return oracle::adaptive_simpson(
      [&](double t) {
        const double x = std::exp(t);
        const double lp = log_pdf(x);
        return std::isfinite(lp) ? std::exp(lp + t) : 0.0;
      },
      knots, 1e-10);
}

/** Gradient of a scalar tape expression of several inputs. */
template <class Builder>
std::vector<double> density_gradient(Builder&& build,
                                     const std::vector<double>& x) {
  advi::Tape tape;
  std::vector<advi::Var> in;
  for (double v : x) in.push_back(tape.input(v));
  advi::Var out = build(in);
  return tape.gradient(out, in);
}

template <class Builder, class Eval>
void check_density_grad(Builder&& build, Eval&& eval,
                        const std::vector<double>& x) {
  const auto grad = density_gradient(build, x);
  const Eigen::VectorXd point =
      Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  const Eigen::VectorXd fd = oracle::fd_gradient(
      [&](const Eigen::VectorXd& p) {
        std::vector<double> v(p.data(), p.data() + p.size());
        return eval(v);
      },
      point);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scale = std::max({std::fabs(fd[i]), std::fabs(grad[i]), 1e-6});
    CHECK(std::fabs(grad[i] - fd[i]) / scale < 1e-6);
  }
}

}  // namespace

TEST_CASE("reference log-density values") {
  CHECK(advi::normal_lpdf(0.0, 0.0, 1.0) ==
        doctest::Approx(-0.91893853320467274).epsilon(1e-14));
  CHECK(advi::poisson_lpmf(0, 1.0) == doctest::Approx(-1.0).epsilon(1e-14));
  // Gamma(10, 10) at 1: 10 log 10 - lgamma(10) + 9 log 1 - 10.
  CHECK(advi::gamma_lpdf(1.0, 10.0, 10.0) ==
        doctest::Approx(10.0 * std::log(10.0) - std::lgamma(10.0) - 10.0)
            .epsilon(1e-12));
  // Dirichlet(1,1,1) is uniform with density Gamma(3) = 2 on the simplex.
  const std::vector<double> third = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  const std::vector<double> ones = {1.0, 1.0, 1.0};
  CHECK(advi::dirichlet_lpdf(std::span<const double>(third),
                             std::span<const double>(ones)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(advi::uniform_lpdf(0.25, 0.0, 2.0) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  // Lognormal at 1 equals the normal density of log 1 = 0.
  CHECK(advi::lognormal_lpdf(1.0, 0.0, 1.0) ==
        doctest::Approx(advi::normal_lpdf(0.0, 0.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("densities integrate to one") {
  // Whole-line families on a wide symmetric grid.
  {
    const std::vector<double> knots = {-12.0, -3.0, 0.0, 3.0, 12.0};
    const double mass = oracle::adaptive_simpson(
        [](double x) { return std::exp(advi::normal_lpdf(x, 0.7, 1.3)); },
        std::vector<double>{-12.0 * 1.3 + 0.7, -3.0, 0.7, 4.0, 12.0 * 1.3 + 0.7},
        1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    (void)knots;
  }
  {
    // Cauchy needs a very wide grid: tail mass ~ scale / (pi x).
    const std::vector<double> knots = {-4e11, -1e8, -1e4, -100.0, -1.0, 0.0,
                                       1.0,   100.0, 1e4,  1e8,    4e11};
    const double mass = oracle::adaptive_simpson(
        [](double x) { return std::exp(advi::cauchy_lpdf(x, 0.0, 1.0)); },
        knots, 1e-9);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
  // Positive-support families, including shapes below one.
  CHECK(positive_density_mass(
            [](double x) { return advi::gamma_lpdf(x, 2.5, 4.2); }, 40.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(positive_density_mass(
            [](double x) { return advi::gamma_lpdf(x, 0.5, 1.0); }, 60.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(positive_density_mass(
            [](double x) { return advi::inv_gamma_lpdf(x, 3.0, 2.0); },
            1e6) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(positive_density_mass(
            [](double x) { return advi::exponential_lpdf(x, 1.7); }, 40.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(positive_density_mass(
            [](double x) { return advi::weibull_lpdf(x, 1.5, 1.0); }, 30.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(positive_density_mass(
            [](double x) { return advi::weibull_lpdf(x, 0.8, 2.0); }, 300.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(positive_density_mass(
            [](double x) { return advi::lognormal_lpdf(x, 0.3, 0.8); },
            4000.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("discrete masses sum to one") {
  // Bernoulli-logit: the two outcomes are complementary.
  for (double l : {-20.0, -2.0, 0.0, 0.5, 3.0, 20.0}) {
    const double p1 = std::exp(advi::bernoulli_logit_lpmf(1, l));
    const double p0 = std::exp(advi::bernoulli_logit_lpmf(0, l));
    CHECK(p1 + p0 == doctest::Approx(1.0).epsilon(1e-12));
    // Symmetry: mass of y under l equals mass of 1 - y under -l.
    CHECK(advi::bernoulli_logit_lpmf(1, l) ==
          doctest::Approx(advi::bernoulli_logit_lpmf(0, -l)).epsilon(1e-14));
  }
  // Poisson: partial sums reach 1 - 1e-12 within a generous count range.
  for (double rate : {0.3, 1.0, 7.5}) {
    double total = 0.0;
    for (long x = 0; x < 80; ++x) {
      total += std::exp(advi::poisson_lpmf(x, rate));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // Both parameterizations agree.
    CHECK(advi::poisson_lpmf(3, rate) ==
          doctest::Approx(advi::poisson_log_lpmf(3, std::log(rate)))
              .epsilon(1e-12));
  }
}

TEST_CASE("log-density gradients match finite differences") {
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::normal_lpdf(v[0], v[1], v[2]);
      },
      [](const std::vector<double>& v) {
        return advi::normal_lpdf(v[0], v[1], v[2]);
      },
      {0.4, -0.3, 1.7});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::lognormal_lpdf(v[0], v[1], v[2]);
      },
      [](const std::vector<double>& v) {
        return advi::lognormal_lpdf(v[0], v[1], v[2]);
      },
      {1.4, 0.3, 0.9});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::cauchy_lpdf(v[0], v[1], v[2]);
      },
      [](const std::vector<double>& v) {
        return advi::cauchy_lpdf(v[0], v[1], v[2]);
      },
      {2.0, 0.5, 3.0});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::gamma_lpdf(v[0], v[1], v[2]);
      },
      [](const std::vector<double>& v) {
        return advi::gamma_lpdf(v[0], v[1], v[2]);
      },
      {0.8, 2.5, 4.2});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::inv_gamma_lpdf(v[0], v[1], v[2]);
      },
      [](const std::vector<double>& v) {
        return advi::inv_gamma_lpdf(v[0], v[1], v[2]);
      },
      {1.2, 3.0, 2.0});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::exponential_lpdf(v[0], 1.7);
      },
      [](const std::vector<double>& v) {
        return advi::exponential_lpdf(v[0], 1.7);
      },
      {0.9});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::weibull_lpdf(v[0], 1.5, 1.0);
      },
      [](const std::vector<double>& v) {
        return advi::weibull_lpdf(v[0], 1.5, 1.0);
      },
      {1.3});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::poisson_lpmf(4, v[0]);
      },
      [](const std::vector<double>& v) { return advi::poisson_lpmf(4, v[0]); },
      {2.2});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::poisson_log_lpmf(4, v[0]);
      },
      [](const std::vector<double>& v) {
        return advi::poisson_log_lpmf(4, v[0]);
      },
      {0.7});
  check_density_grad(
      [](const std::vector<advi::Var>& v) {
        return advi::bernoulli_logit_lpmf(1, v[0]);
      },
      [](const std::vector<double>& v) {
        return advi::bernoulli_logit_lpmf(1, v[0]);
      },
      {-0.6});
  const std::vector<double> alpha = {1.5, 2.0, 3.0};
  check_density_grad(
      [&](const std::vector<advi::Var>& v) {
        return advi::dirichlet_lpdf(std::span<const advi::Var>(v),
                                    std::span<const double>(alpha));
      },
      [&](const std::vector<double>& v) {
        return advi::dirichlet_lpdf(std::span<const double>(v),
                                    std::span<const double>(alpha));
      },
      {0.2, 0.3, 0.5});
}

TEST_CASE("out-of-support values and invalid parameters are distinct") {
  // Plain doubles: out of support signals -inf, bad parameters throw.
  CHECK(advi::gamma_lpdf(-1.0, 2.0, 3.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK(advi::lognormal_lpdf(-0.5, 0.0, 1.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK(advi::uniform_lpdf(5.0, 0.0, 1.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(advi::gamma_lpdf(1.0, -2.0, 3.0), advi::parameter_error);
  CHECK_THROWS_AS(advi::normal_lpdf(0.0, 0.0, -1.0), advi::parameter_error);
  CHECK_THROWS_AS(advi::uniform_lpdf(0.5, 2.0, 1.0), advi::parameter_error);

  // On the tape, out-of-support raises its own exception type so Monte Carlo
  // callers can redraw.
  advi::Tape tape;
  advi::Var neg = tape.input(-1.0);
  CHECK_THROWS_AS(advi::gamma_lpdf(neg, 2.0, 3.0),
                  advi::out_of_support_error);
}

TEST_CASE("uniform density is flat inside the interval") {
  advi::Tape tape;
  advi::Var y = tape.input(0.3);
  advi::Var lp = advi::uniform_lpdf(y, 0.0, 2.0);
  CHECK(lp.value() == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  std::vector<advi::Var> in = {y};
  CHECK(tape.gradient(lp, in)[0] == 0.0);
}
