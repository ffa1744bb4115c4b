#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/**
 * Gaussian mixture with diagonal component covariances and the discrete
 * assignments marginalized out:
 *   theta ~ Dir(1000, ..., 1000),  mu_kd ~ N(0, 1),  sigma_kd ~ logNormal(0, 1),
 *   log p(y_n | .) = log sum_k exp(log theta_k + sum_d log N(y_nd; mu_kd, sigma_kd)).
 * K = 1 drops the weight block entirely (the weight is the constant 1).
 * Parameter order: theta (K), mu (K x D row-major), sigma (K x D).
 */
class Gmm final : public ModelBase<Gmm> {
 public:
  std::string name() const override { return "gmm"; }

  void validate(const Dataset& data) const override {
    const Eigen::MatrixXd y = data.matrix("y");
    if (y.rows() < 1 || y.cols() < 1) {
      throw data_error("gmm: y must be non-empty");
    }
    if (data.integer("K") < 1) throw data_error("gmm: K must be >= 1");
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t k = data.integer("K");
    const std::size_t d = data.matrix("y").cols();
    std::vector<ParamBlock> out;
    if (k > 1) out.push_back({"theta", ConstraintSpec::simplex(k), {}});
    out.push_back({"mu", ConstraintSpec::unconstrained(k * d), {k, d}});
    out.push_back(
        {"sigma", ConstraintSpec::lower_bounded(0.0, k * d), {k, d}});
    return out;
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.matrix("y").rows();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::MatrixXd y = data.matrix("y");
    const std::size_t k = data.integer("K");
    const std::size_t d = y.cols();
    const std::size_t n_weights = k > 1 ? k : 0;
    std::span<const S> weight = theta.subspan(0, n_weights);
    std::span<const S> mu = theta.subspan(n_weights, k * d);
    std::span<const S> sigma = theta.subspan(n_weights + k * d, k * d);

    S lp = detail::zero_like(theta);
    if (k > 1) {
      const std::vector<double> alpha(k, 1000.0);
      lp = lp + dirichlet_lpdf(weight, alpha);
    }
    for (std::size_t j = 0; j < k * d; ++j) {
      lp = lp + normal_lpdf(mu[j], 0.0, 1.0) +
           lognormal_lpdf(sigma[j], 0.0, 1.0);
    }

    std::vector<S> comp(k);
    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, y.rows(), [&](std::size_t n) {
      for (std::size_t c = 0; c < k; ++c) {
        S term = k > 1 ? log(weight[c]) : detail::zero_like(theta);
        for (std::size_t j = 0; j < d; ++j) {
          term = term + normal_lpdf(y(n, j), mu[c * d + j], sigma[c * d + j]);
        }
        comp[c] = term;
      }
      ll = ll + log_sum_exp(std::span<const S>(comp));
    });
    return lp + scale * ll;
  }

  bool has_predictive() const override { return true; }

  double predictive_log_density(const Dataset& train, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    const Eigen::MatrixXd y = held_out.matrix("y");
    const std::size_t k = train.integer("K");
    const std::size_t d = train.matrix("y").cols();
    if (static_cast<std::size_t>(y.cols()) != d) {
      throw data_error("gmm: held-out y has wrong column count");
    }
    const std::size_t n_weights = k > 1 ? k : 0;
    std::vector<double> comp(k);
    for (std::size_t c = 0; c < k; ++c) {
      double term = k > 1 ? std::log(theta[c]) : 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        term += normal_lpdf(y(row, j), theta[n_weights + c * d + j],
                            theta[n_weights + k * d + c * d + j]);
      }
      comp[c] = term;
    }
    return log_sum_exp(std::span<const double>(comp));
  }
};

}  // namespace

const Model& gmm_model() {
  static const Gmm model;
  return model;
}

}  // namespace advi
