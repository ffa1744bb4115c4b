#include "advi/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "advi/math.hpp"

namespace advi {

double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0) {  // boost small shapes, then shrink back
    const double u = rng.uniform();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

namespace {

Eigen::VectorXd normal_vector(std::size_t n, Rng& rng, double sd = 1.0) {
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = sd * rng.normal();
  return v;
}

Eigen::VectorXd dirichlet_draw(std::size_t k, double alpha, Rng& rng) {
  Eigen::VectorXd g(k);
  for (std::size_t i = 0; i < k; ++i) g[i] = gamma_draw(rng, alpha);
  return g / g.sum();
}

long poisson_draw(Rng& rng, double rate) {
  // Inversion by sequential search for small rates, otherwise a normal
  // approximation rounded and clipped; counts here are moderate either way.
  if (rate < 30.0) {
    const double target = rng.uniform();
    double p = std::exp(-rate);
    double cdf = p;
    long x = 0;
    while (cdf < target && x < 1000) {
      ++x;
      p *= rate / static_cast<double>(x);
      cdf += p;
    }
    return x;
  }
  const double draw = rate + std::sqrt(rate) * rng.normal();
  return std::max(0L, static_cast<long>(std::llround(draw)));
}

}  // namespace

Dataset simulate_weibull_poisson(std::size_t n, Rng& rng) {
  // Weibull(1.5, 1) via inversion of the survival function.
  const double theta = std::pow(-std::log(rng.uniform()), 1.0 / 1.5);
  Eigen::VectorXd x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = static_cast<double>(poisson_draw(rng, theta));
  Dataset data;
  data.set_vector("x", x);
  data.set_scalar("true_theta", theta);
  return data;
}

Dataset simulate_mvn_conjugate(std::size_t n, std::size_t dim, Rng& rng) {
  Eigen::MatrixXd sigma =
      Eigen::MatrixXd::Constant(dim, dim, 0.9);
  sigma.diagonal().setOnes();
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
  const Eigen::VectorXd mu = normal_vector(dim, rng);
  Eigen::MatrixXd y(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    y.row(i) = (mu + chol * normal_vector(dim, rng)).transpose();
  Dataset data;
  data.set_matrix("y", y);
  data.set_matrix("Sigma", sigma);
  data.set_vector("true_mu", mu);
  return data;
}

Dataset simulate_logistic_regression(std::size_t n, Rng& rng) {
  const std::size_t d = 10;  // intercept + 9 covariates
  const Eigen::VectorXd beta = normal_vector(d, rng);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 1; j < d; ++j) x(i, j) = rng.normal();
    const double p = math::logistic(x.row(i).dot(beta));
    y[i] = rng.uniform() < p ? 1.0 : 0.0;
  }
  Dataset data;
  data.set_matrix("X", x);
  data.set_vector("y", y);
  data.set_vector("true_beta", beta);
  return data;
}

Dataset simulate_stoch_vol(std::size_t t, Rng& rng, double mu, double phi,
                           double sigma) {
  Eigen::VectorXd h(t);
  Eigen::VectorXd y(t);
  h[0] = mu + sigma / std::sqrt(1.0 - phi * phi) * rng.normal();
  for (std::size_t i = 1; i < t; ++i)
    h[i] = mu + phi * (h[i - 1] - mu) + sigma * rng.normal();
  for (std::size_t i = 0; i < t; ++i)
    y[i] = std::exp(0.5 * h[i]) * rng.normal();
  Dataset data;
  data.set_vector("y", y);
  data.set_vector("true_h", h);
  data.set_scalar("true_mu", mu);
  data.set_scalar("true_phi", phi);
  data.set_scalar("true_sigma", sigma);
  return data;
}

Dataset simulate_linreg_ard(std::size_t n, std::size_t dim, Rng& rng) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  const std::size_t active = dim - dim / 2;
  for (std::size_t j = 0; j < active; ++j) w[j] = 2.0 * rng.normal();
  const double noise_sd = 0.5;
  Eigen::MatrixXd x(n, dim);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = rng.normal();
    y[i] = x.row(i).dot(w) + noise_sd * rng.normal();
  }
  Dataset data;
  data.set_matrix("X", x);
  data.set_vector("y", y);
  data.set_vector("true_w", w);
  data.set_scalar("true_sigma", noise_sd);
  return data;
}

Dataset simulate_hier_logistic(std::size_t n, std::size_t n_age,
                               std::size_t n_edu, std::size_t n_region,
                               std::size_t n_state, Rng& rng) {
  const Eigen::VectorXd b =
      (Eigen::VectorXd(5) << 0.4, -0.3, 0.5, -0.2, 1.5).finished();
  const double scale = 0.5;  // every group-level sd

  const Eigen::VectorXd a_age = normal_vector(n_age, rng, scale);
  const Eigen::VectorXd a_edu = normal_vector(n_edu, rng, scale);
  const Eigen::VectorXd a_age_edu = normal_vector(n_age * n_edu, rng, scale);
  const Eigen::VectorXd a_region = normal_vector(n_region, rng, scale);

  Eigen::VectorXd region(n_state);
  Eigen::VectorXd v_prev(n_state);
  Eigen::VectorXd a_state(n_state);
  for (std::size_t j = 0; j < n_state; ++j) {
    const std::size_t m = j % n_region;
    region[j] = static_cast<double>(m + 1);
    v_prev[j] = 0.4 + 0.2 * rng.uniform();
    a_state[j] = a_region[m] + b[4] * v_prev[j] + scale * rng.normal();
  }

  Eigen::VectorXd female(n), black(n), age(n), edu(n), state(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    female[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    black[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
    const std::size_t ia = rng.uniform_below(n_age);
    const std::size_t ie = rng.uniform_below(n_edu);
    const std::size_t is = rng.uniform_below(n_state);
    age[i] = static_cast<double>(ia + 1);
    edu[i] = static_cast<double>(ie + 1);
    state[i] = static_cast<double>(is + 1);
    const double logit = b[0] + b[1] * female[i] + b[2] * black[i] +
                         b[3] * female[i] * black[i] + a_age[ia] + a_edu[ie] +
                         a_age_edu[ia * n_edu + ie] + a_state[is];
    y[i] = rng.uniform() < math::logistic(logit) ? 1.0 : 0.0;
  }

  Dataset data;
  data.set_vector("y", y);
  data.set_vector("female", female);
  data.set_vector("black", black);
  data.set_vector("age", age);
  data.set_vector("edu", edu);
  data.set_vector("state", state);
  data.set_vector("region", region);
  data.set_vector("v_prev", v_prev);
  data.set_vector("true_b", b);
  return data;
}

Dataset simulate_gamma_poisson_nmf(std::size_t users, std::size_t items,
                                   std::size_t k, Rng& rng) {
  Eigen::MatrixXd theta(users, k);
  for (std::size_t u = 0; u < users; ++u) {
    std::vector<double> row(k);
    for (double& v : row) v = gamma_draw(rng, 1.0);
    std::sort(row.begin(), row.end());
    for (std::size_t f = 0; f < k; ++f) theta(u, f) = row[f];
  }
  Eigen::MatrixXd beta(items, k);
  for (std::size_t i = 0; i < items; ++i)
    for (std::size_t f = 0; f < k; ++f) beta(i, f) = gamma_draw(rng, 1.0);

  Eigen::MatrixXd y(users, items);
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t i = 0; i < items; ++i)
      y(u, i) = static_cast<double>(
          poisson_draw(rng, theta.row(u).dot(beta.row(i))));
  Dataset data;
  data.set_matrix("Y", y);
  data.set_scalar("K", static_cast<double>(k));
  data.set_matrix("true_theta", theta);
  data.set_matrix("true_beta", beta);
  return data;
}

Dataset simulate_dirichlet_exponential_nmf(std::size_t users,
                                           std::size_t items, std::size_t k,
                                           Rng& rng) {
  Eigen::MatrixXd theta(users, k);
  for (std::size_t u = 0; u < users; ++u)
    theta.row(u) = dirichlet_draw(k, 1000.0, rng).transpose();
  Eigen::MatrixXd beta(items, k);
  for (std::size_t i = 0; i < items; ++i)
    for (std::size_t f = 0; f < k; ++f)
      beta(i, f) = -std::log(rng.uniform()) / 0.1;  // Exponential(0.1)

  Eigen::MatrixXd y(users, items);
  for (std::size_t u = 0; u < users; ++u)
    for (std::size_t i = 0; i < items; ++i)
      y(u, i) = static_cast<double>(
          poisson_draw(rng, theta.row(u).dot(beta.row(i))));
  Dataset data;
  data.set_matrix("Y", y);
  data.set_scalar("K", static_cast<double>(k));
  data.set_matrix("true_theta", theta);
  data.set_matrix("true_beta", beta);
  return data;
}

Dataset simulate_gmm(std::size_t n, std::size_t k, std::size_t dim,
                     double separation, Rng& rng) {
  Eigen::MatrixXd means(k, dim);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < dim; ++j)
      means(c, j) = ((c >> j) & 1u) ? separation : -separation;
  const double sd = 0.5;

  Eigen::MatrixXd y(n, dim);
  Eigen::VectorXd assignment(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.uniform_below(k);
    assignment[i] = static_cast<double>(c);
    for (std::size_t j = 0; j < dim; ++j)
      y(i, j) = means(c, j) + sd * rng.normal();
  }
  Dataset data;
  data.set_matrix("y", y);
  data.set_scalar("K", static_cast<double>(k));
  data.set_matrix("true_means", means);
  data.set_vector("true_assignment", assignment);
  return data;
}

namespace {

Dataset simulate_ppca_impl(std::size_t n, std::size_t dim,
                           std::size_t true_rank, std::size_t fit_rank,
                           bool supervised, Rng& rng) {
  Eigen::MatrixXd w(dim, true_rank);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t j = 0; j < true_rank; ++j) w(r, j) = 2.0 * rng.normal();
  Eigen::VectorXd w_y = Eigen::VectorXd::Zero(true_rank);
  if (supervised) w_y[0] = 2.0;  // response rides the first latent axis
  const double noise_sd = 0.5;

  Eigen::MatrixXd z(n, true_rank);
  Eigen::MatrixXd x(n, dim);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd zi = normal_vector(true_rank, rng);
    z.row(i) = zi.transpose();
    x.row(i) = (w * zi + noise_sd * normal_vector(dim, rng)).transpose();
    if (supervised) y[i] = w_y.dot(zi) + noise_sd * rng.normal();
  }
  Dataset data;
  data.set_matrix("x", x);
  data.set_scalar("M", static_cast<double>(fit_rank));
  if (supervised) data.set_vector("y", y);
  data.set_matrix("true_w", w);
  data.set_matrix("true_z", z);
  if (supervised) data.set_vector("true_w_y", w_y);
  return data;
}

}  // namespace

Dataset simulate_ppca(std::size_t n, std::size_t dim, std::size_t true_rank,
                      std::size_t fit_rank, Rng& rng) {
  return simulate_ppca_impl(n, dim, true_rank, fit_rank, false, rng);
}

Dataset simulate_sup_ppca(std::size_t n, std::size_t dim,
                          std::size_t true_rank, std::size_t fit_rank,
                          Rng& rng) {
  return simulate_ppca_impl(n, dim, true_rank, fit_rank, true, rng);
}

}  // namespace advi
