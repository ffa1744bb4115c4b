#include "advi/math.hpp"

#include <cmath>
#include <limits>

namespace advi {
namespace math {

namespace {

// Lanczos coefficients for g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

double lgamma_lanczos(double x) {
  // Valid for x >= 0.5.
  x -= 1.0;
  double a = kLanczos[0];
  const double t = x + kLanczosG + 0.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i);
  return 0.5 * log_two_pi() + (x + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

double lgamma(double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x < 0.5) {
    // Reflection: log|Gamma(x)| = log(pi / |sin(pi x)|) - log Gamma(1 - x).
    const double s = std::sin(pi() * x);
    if (s == 0.0) return std::numeric_limits<double>::infinity();  // poles
    return std::log(pi() / std::fabs(s)) - lgamma_lanczos(1.0 - x);
  }
  return lgamma_lanczos(x);
}

double digamma(double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0 && x == std::floor(x)) {
    return std::numeric_limits<double>::quiet_NaN();  // poles
  }
  double result = 0.0;
  if (x < 0.0) {
    // Reflection: psi(1 - x) - psi(x) = pi / tan(pi x).
    result -= pi() / std::tan(pi() * x);
    x = 1.0 - x;
  }
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series: log x - 1/(2x) - sum B_{2n} / (2n x^{2n}).
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return result + std::log(x) - 0.5 * inv - series;
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  double m = x[0];
  for (double v : x)
    if (v > m) m = v;
  if (!std::isfinite(m)) return m;  // all -inf, or a +inf dominates
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - m);
  return m + std::log(sum);
}

}  // namespace math
}  // namespace advi
