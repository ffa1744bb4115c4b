#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/**
 * Stochastic volatility: returns with an AR(1) log-volatility chain,
 *   mu ~ Cauchy(0, 10),  phi ~ Unif(-1, 1),  sigma ~ logNormal(0, 10),
 *   h_1 ~ N(mu, sigma / sqrt(1 - phi^2)),
 *   h_t ~ N(mu + phi (h_{t-1} - mu), sigma),
 *   y_t ~ N(0, exp(h_t / 2)).
 * Parameter order: mu, phi, sigma, h_1..h_T.
 */
class StochVol final : public ModelBase<StochVol> {
 public:
  std::string name() const override { return "stoch_vol"; }

  void validate(const Dataset& data) const override {
    if (data.vector("y").size() < 2) {
      throw data_error("stoch_vol: need at least 2 observations");
    }
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t t = data.vector("y").size();
    return {{"mu", ConstraintSpec::unconstrained(), {}},
            {"phi", ConstraintSpec::interval(-1.0, 1.0), {}},
            {"sigma", ConstraintSpec::lower_bounded(0.0), {}},
            {"h", ConstraintSpec::unconstrained(t), {}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.vector("y").size();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::VectorXd y = data.vector("y");
    const std::size_t t_len = y.size();
    const S& mu = theta[0];
    const S& phi = theta[1];
    const S& sigma = theta[2];
    std::span<const S> h = theta.subspan(3, t_len);

    S lp = cauchy_lpdf(mu, 0.0, 10.0) + uniform_lpdf(phi, -1.0, 1.0) +
           lognormal_lpdf(sigma, 0.0, 10.0);
    // Stationary start, then the AR(1) chain (never subsampled).
    lp = lp + normal_lpdf(h[0], mu, sigma / sqrt(1.0 - square(phi)));
    for (std::size_t t = 1; t < t_len; ++t)
      lp = lp + normal_lpdf(h[t], mu + phi * (h[t - 1] - mu), sigma);

    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, t_len, [&](std::size_t t) {
      ll = ll + normal_lpdf(y[t], 0.0, exp(0.5 * h[t]));
    });
    return lp + scale * ll;
  }
};

}  // namespace

const Model& stoch_vol_model() {
  static const StochVol model;
  return model;
}

}  // namespace advi
