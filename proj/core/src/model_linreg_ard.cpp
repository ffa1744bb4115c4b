#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/**
 * Bayesian linear regression with automatic relevance determination:
 *   sigma ~ InvGamma(1, 1),  alpha_d ~ Gamma(1, 1),
 *   w_d ~ N(0, sigma / sqrt(alpha_d)),
 *   y_n ~ N(w . x_n, sigma).
 * Large fitted alpha_d shrinks w_d toward zero, pruning inert regressors.
 * Parameter order: sigma, alpha_1..alpha_D, w_1..w_D.
 */
class LinRegArd final : public ModelBase<LinRegArd> {
 public:
  std::string name() const override { return "linreg_ard"; }

  void validate(const Dataset& data) const override {
    const Eigen::MatrixXd x = data.matrix("X");
    if (static_cast<std::size_t>(x.rows()) != data.vector("y").size()) {
      throw data_error("linreg_ard: X rows and y length differ");
    }
    if (x.cols() < 1) throw data_error("linreg_ard: X has no columns");
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t d = data.matrix("X").cols();
    return {{"sigma", ConstraintSpec::lower_bounded(0.0), {}},
            {"alpha", ConstraintSpec::lower_bounded(0.0, d), {}},
            {"w", ConstraintSpec::unconstrained(d), {}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.vector("y").size();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::MatrixXd x = data.matrix("X");
    const Eigen::VectorXd y = data.vector("y");
    const std::size_t d = x.cols();
    const S& sigma = theta[0];
    std::span<const S> alpha = theta.subspan(1, d);
    std::span<const S> w = theta.subspan(1 + d, d);

    S lp = inv_gamma_lpdf(sigma, 1.0, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
      lp = lp + gamma_lpdf(alpha[j], 1.0, 1.0) +
           normal_lpdf(w[j], 0.0, sigma / sqrt(alpha[j]));
    }

    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, y.size(), [&](std::size_t n) {
      S mean = detail::zero_like(theta);
      for (std::size_t j = 0; j < d; ++j) mean = mean + w[j] * x(n, j);
      ll = ll + normal_lpdf(y[n], mean, sigma);
    });
    return lp + scale * ll;
  }

  bool has_predictive() const override { return true; }

  double predictive_log_density(const Dataset& train, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    const Eigen::MatrixXd x = held_out.matrix("X");
    const std::size_t d = train.matrix("X").cols();
    if (static_cast<std::size_t>(x.cols()) != d) {
      throw data_error("linreg_ard: held-out X has wrong column count");
    }
    std::span<const double> w = theta.subspan(1 + d, d);
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += w[j] * x(row, j);
    return normal_lpdf(held_out.vector("y")[row], mean, theta[0]);
  }
};

}  // namespace

const Model& linreg_ard_model() {
  static const LinRegArd model;
  return model;
}

}  // namespace advi
