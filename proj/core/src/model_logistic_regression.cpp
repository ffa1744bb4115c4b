#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/**
 * Bernoulli regression with a logit link and independent standard normal
 * priors on the coefficients:
 *   beta_d ~ N(0, 1),  y_n ~ Bern(sigmoid(x_n . beta)).
 * An intercept, if wanted, is a column of ones in X.
 */
class LogisticRegression final : public ModelBase<LogisticRegression> {
 public:
  std::string name() const override { return "logistic_regression"; }

  void validate(const Dataset& data) const override {
    const Eigen::MatrixXd x = data.matrix("X");
    const std::vector<long> y = data.int_vector("y");
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
      throw data_error("logistic_regression: X rows and y length differ");
    }
    for (long v : y) {
      if (v != 0 && v != 1) {
        throw data_error("logistic_regression: y must be 0/1");
      }
    }
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t d = data.matrix("X").cols();
    return {{"beta", ConstraintSpec::unconstrained(d), {}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.matrix("X").rows();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::MatrixXd x = data.matrix("X");
    const std::vector<long> y = data.int_vector("y");
    const Eigen::Index d = x.cols();

    S lp = normal_lpdf(theta[0], 0.0, 1.0);
    for (Eigen::Index j = 1; j < d; ++j)
      lp = lp + normal_lpdf(theta[j], 0.0, 1.0);

    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, y.size(), [&](std::size_t n) {
      S logit = x(n, 0) * theta[0];
      for (Eigen::Index j = 1; j < d; ++j)
        logit = logit + x(n, j) * theta[j];
      ll = ll + bernoulli_logit_lpmf(static_cast<int>(y[n]), logit);
    });
    return lp + scale * ll;
  }

  bool has_predictive() const override { return true; }

  double predictive_log_density(const Dataset&, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    const Eigen::MatrixXd x = held_out.matrix("X");
    const std::vector<long> y = held_out.int_vector("y");
    double logit = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) logit += x(row, j) * theta[j];
    return bernoulli_logit_lpmf(static_cast<int>(y.at(row)), logit);
  }
};

}  // namespace

const Model& logistic_regression_model() {
  static const LogisticRegression model;
  return model;
}

}  // namespace advi
