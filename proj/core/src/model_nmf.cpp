#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/* Shared pieces of the two Poisson factorization models: a U x I count
 * matrix Y factorized through K-vectors theta_u (per user) and beta_i (per
 * item), y_ui ~ Poisson(theta_u . beta_i).  Minibatches subsample users;
 * theta is laid out first, then beta, both row-major. */

std::size_t factor_count(const Dataset& data) {
  if (!data.has("K")) return 10;
  const long k = data.integer("K");
  if (k < 1) throw data_error("nmf: K must be >= 1");
  return static_cast<std::size_t>(k);
}

void validate_counts(const char* name, const Dataset& data) {
  const Eigen::MatrixXd y = data.matrix("Y");
  if (y.rows() < 1 || y.cols() < 1) {
    throw data_error(std::string(name) + ": Y must be non-empty");
  }
  for (Eigen::Index u = 0; u < y.rows(); ++u)
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
      const double v = y(u, i);
      if (!(v >= 0.0) || v != std::floor(v)) {
        throw data_error(std::string(name) +
                         ": Y entries must be non-negative integers");
      }
    }
}

/** Likelihood of the active users; rates come from strictly positive
 *  factors, so the log inside poisson_lpmf is always defined. */
template <class S>
S poisson_factor_likelihood(const Eigen::MatrixXd& y, std::size_t k,
                            std::span<const S> theta, std::span<const S> beta,
                            std::span<const std::size_t> minibatch) {
  const std::size_t n_items = y.cols();
  S ll = detail::zero_like(theta);
  for_each_observation(minibatch, y.rows(), [&](std::size_t u) {
    for (std::size_t i = 0; i < n_items; ++i) {
      S rate = theta[u * k] * beta[i * k];
      for (std::size_t f = 1; f < k; ++f)
        rate = rate + theta[u * k + f] * beta[i * k + f];
      ll = ll + poisson_lpmf(static_cast<long>(y(u, i)), rate);
    }
  });
  return ll;
}

/** Held-out counts for an existing user: the log likelihood of one row of a
 *  replicate Y matrix (same users and items) under the fitted factors. */
double held_out_row(const Dataset& train, const Dataset& held_out,
                    std::size_t row, std::span<const double> theta) {
  const Eigen::MatrixXd y_new = held_out.matrix("Y");
  const Eigen::MatrixXd y = train.matrix("Y");
  const std::size_t k = factor_count(train);
  if (y_new.cols() != y.cols() ||
      static_cast<Eigen::Index>(row) >= y.rows()) {
    throw data_error("nmf: held-out Y must match the training shape");
  }
  const std::size_t n_theta = static_cast<std::size_t>(y.rows()) * k;
  std::span<const double> user = theta.subspan(row * k, k);
  std::span<const double> item = theta.subspan(n_theta);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y_new.cols(); ++i) {
    double rate = 0.0;
    for (std::size_t f = 0; f < k; ++f) rate += user[f] * item[i * k + f];
    ll += poisson_lpmf(static_cast<long>(y_new(row, i)), rate);
  }
  return ll;
}

/**
 * Gamma-Poisson factorization.  Each user's factor vector is constrained
 * positive_ordered to pin down the factor permutation; all Gamma
 * hyper-parameters are 1.
 */
class GammaPoissonNmf final : public ModelBase<GammaPoissonNmf> {
 public:
  std::string name() const override { return "gamma_poisson_nmf"; }

  void validate(const Dataset& data) const override {
    validate_counts("gamma_poisson_nmf", data);
    factor_count(data);
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t u = data.matrix("Y").rows();
    const std::size_t i = data.matrix("Y").cols();
    const std::size_t k = factor_count(data);
    return {{"theta", ConstraintSpec::positive_ordered(k), {u, k}, u},
            {"beta", ConstraintSpec::lower_bounded(0.0, i * k), {i, k}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.matrix("Y").rows();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::MatrixXd y = data.matrix("Y");
    const std::size_t k = factor_count(data);
    const std::size_t n_theta = static_cast<std::size_t>(y.rows()) * k;
    std::span<const S> user = theta.subspan(0, n_theta);
    std::span<const S> item = theta.subspan(n_theta);

    S lp = detail::zero_like(theta);
    for (const S& t : user) lp = lp + gamma_lpdf(t, 1.0, 1.0);
    for (const S& b : item) lp = lp + gamma_lpdf(b, 1.0, 1.0);
    return lp + scale * poisson_factor_likelihood(y, k, user, item, minibatch);
  }

  bool has_predictive() const override { return true; }

  double predictive_log_density(const Dataset& train, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    return held_out_row(train, held_out, row, theta);
  }
};

/**
 * Dirichlet-Exponential factorization: theta_u on the simplex with a
 * strong symmetric Dir(1000) prior, beta_ik ~ Exponential(0.1).
 */
class DirichletExponentialNmf final
    : public ModelBase<DirichletExponentialNmf> {
 public:
  std::string name() const override { return "dirichlet_exponential_nmf"; }

  void validate(const Dataset& data) const override {
    validate_counts("dirichlet_exponential_nmf", data);
    if (factor_count(data) < 2) {
      throw data_error("dirichlet_exponential_nmf: K must be >= 2");
    }
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t u = data.matrix("Y").rows();
    const std::size_t i = data.matrix("Y").cols();
    const std::size_t k = factor_count(data);
    return {{"theta", ConstraintSpec::simplex(k), {u, k}, u},
            {"beta", ConstraintSpec::lower_bounded(0.0, i * k), {i, k}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.matrix("Y").rows();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::MatrixXd y = data.matrix("Y");
    const std::size_t k = factor_count(data);
    const std::size_t n_theta = static_cast<std::size_t>(y.rows()) * k;
    std::span<const S> user = theta.subspan(0, n_theta);
    std::span<const S> item = theta.subspan(n_theta);
    const std::vector<double> alpha(k, 1000.0);

    S lp = detail::zero_like(theta);
    for (std::size_t u = 0; u < static_cast<std::size_t>(y.rows()); ++u)
      lp = lp + dirichlet_lpdf(user.subspan(u * k, k), alpha);
    for (const S& b : item) lp = lp + exponential_lpdf(b, 0.1);
    return lp + scale * poisson_factor_likelihood(y, k, user, item, minibatch);
  }

  bool has_predictive() const override { return true; }

  double predictive_log_density(const Dataset& train, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    return held_out_row(train, held_out, row, theta);
  }
};

}  // namespace

const Model& gamma_poisson_nmf_model() {
  static const GammaPoissonNmf model;
  return model;
}

const Model& dirichlet_exponential_nmf_model() {
  static const DirichletExponentialNmf model;
  return model;
}

}  // namespace advi
