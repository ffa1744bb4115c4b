#pragma once

#include <limits>
#include <span>
#include <stdexcept>

#include "advi/autodiff.hpp"
#include "advi/math.hpp"

namespace advi {

/** Invalid distribution parameter (a modeling bug, not a data property). */
class parameter_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/** Value outside the distribution's support.  The double path signals this
 *  with -inf instead (usable as a rejection signal); only the tape path,
 *  which cannot carry -inf, throws. */
class out_of_support_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

template <class R>
R out_of_support(const char* dist) {
  if constexpr (std::is_same_v<R, double>) {
    (void)dist;
    return -std::numeric_limits<double>::infinity();
  } else {
    throw out_of_support_error(std::string(dist) +
                               ": value outside support on tape");
  }
}

inline void require_param(bool ok, const char* msg) {
  if (!ok) throw parameter_error(msg);
}

}  // namespace detail

/*
 * Log densities / masses with full normalizing constants.  Every function is
 * generic over double and Var arguments (data enters as double, latent
 * parameters as either), and returns the promoted scalar type.
 */

template <class Y, class M, class S>
promote_t<Y, M, S> normal_lpdf(const Y& y, const M& mu, const S& sigma) {
  detail::require_param(value_of(sigma) > 0.0, "normal: sigma must be > 0");
  auto z = (y - mu) / sigma;
  return -0.5 * math::log_two_pi() - log(sigma) - 0.5 * square(z);
}

template <class Y, class M, class S>
promote_t<Y, M, S> lognormal_lpdf(const Y& y, const M& mu, const S& sigma) {
  detail::require_param(value_of(sigma) > 0.0, "lognormal: sigma must be > 0");
  if (!(value_of(y) > 0.0))
    return detail::out_of_support<promote_t<Y, M, S>>("lognormal");
  auto ly = log(y);
  return normal_lpdf(ly, mu, sigma) - ly;
}

template <class Y, class M, class S>
promote_t<Y, M, S> cauchy_lpdf(const Y& y, const M& loc, const S& scale) {
  detail::require_param(value_of(scale) > 0.0, "cauchy: scale must be > 0");
  auto z = (y - loc) / scale;
  return -std::log(math::pi()) - log(scale) - log1p(square(z));
}

template <class Y>
promote_t<Y> uniform_lpdf(const Y& y, double lb, double ub) {
  detail::require_param(lb < ub, "uniform: lb must be < ub");
  if (!(value_of(y) > lb && value_of(y) < ub))
    return detail::out_of_support<promote_t<Y>>("uniform");
  if constexpr (std::is_same_v<Y, Var>) {
    return y.tape().constant(-std::log(ub - lb));
  } else {
    return -std::log(ub - lb);
  }
}

template <class Y, class A, class B>
promote_t<Y, A, B> gamma_lpdf(const Y& y, const A& shape, const B& rate) {
  detail::require_param(value_of(shape) > 0.0, "gamma: shape must be > 0");
  detail::require_param(value_of(rate) > 0.0, "gamma: rate must be > 0");
  if (!(value_of(y) > 0.0))
    return detail::out_of_support<promote_t<Y, A, B>>("gamma");
  return shape * log(rate) - lgamma(shape) + (shape - 1.0) * log(y) - rate * y;
}

template <class Y, class A, class B>
promote_t<Y, A, B> inv_gamma_lpdf(const Y& y, const A& shape, const B& scale) {
  detail::require_param(value_of(shape) > 0.0, "inv_gamma: shape must be > 0");
  detail::require_param(value_of(scale) > 0.0, "inv_gamma: scale must be > 0");
  if (!(value_of(y) > 0.0))
    return detail::out_of_support<promote_t<Y, A, B>>("inv_gamma");
  return shape * log(scale) - lgamma(shape) - (shape + 1.0) * log(y) -
         scale / y;
}

template <class Y>
promote_t<Y> exponential_lpdf(const Y& y, double rate) {
  detail::require_param(rate > 0.0, "exponential: rate must be > 0");
  if (!(value_of(y) >= 0.0))
    return detail::out_of_support<promote_t<Y>>("exponential");
  return std::log(rate) - rate * y;
}

template <class Y>
promote_t<Y> weibull_lpdf(const Y& y, double shape, double scale) {
  detail::require_param(shape > 0.0, "weibull: shape must be > 0");
  detail::require_param(scale > 0.0, "weibull: scale must be > 0");
  if (!(value_of(y) > 0.0))
    return detail::out_of_support<promote_t<Y>>("weibull");
  auto r = y / scale;
  return std::log(shape / scale) + (shape - 1.0) * log(r) - pow(r, shape);
}

template <class S>
promote_t<S> dirichlet_lpdf(std::span<const S> theta,
                            std::span<const double> alpha) {
  if (theta.size() != alpha.size())
    throw parameter_error("dirichlet: dimension mismatch");
  double alpha_sum = 0.0;
  double norm = 0.0;
  for (double a : alpha) {
    detail::require_param(a > 0.0, "dirichlet: alpha must be > 0");
    alpha_sum += a;
    norm -= math::lgamma(a);
  }
  norm += math::lgamma(alpha_sum);
  for (const S& t : theta)
    if (!(value_of(t) > 0.0))
      return detail::out_of_support<promote_t<S>>("dirichlet");
  promote_t<S> acc = (alpha[0] - 1.0) * log(theta[0]);
  for (std::size_t i = 1; i < theta.size(); ++i)
    acc = acc + (alpha[i] - 1.0) * log(theta[i]);
  return acc + norm;
}

/** Poisson in terms of the log rate; no positivity restriction on the rate
 *  parameterization, which is what the transformed-density fixture exercises. */
template <class L>
promote_t<L> poisson_log_lpmf(long x, const L& log_rate) {
  if (x < 0) return detail::out_of_support<promote_t<L>>("poisson");
  return static_cast<double>(x) * log_rate - exp(log_rate) -
         math::lgamma(static_cast<double>(x) + 1.0);
}

template <class R>
promote_t<R> poisson_lpmf(long x, const R& rate) {
  detail::require_param(value_of(rate) > 0.0, "poisson: rate must be > 0");
  if (x < 0) return detail::out_of_support<promote_t<R>>("poisson");
  return static_cast<double>(x) * log(rate) - rate -
         math::lgamma(static_cast<double>(x) + 1.0);
}

template <class L>
promote_t<L> bernoulli_logit_lpmf(int y, const L& logit_p) {
  if (y != 0 && y != 1)
    return detail::out_of_support<promote_t<L>>("bernoulli");
  return y == 1 ? log_logistic(logit_p) : log_logistic(-logit_p);
}

}  // namespace advi
