#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/**
 * Count data with a single positive rate:
 *   theta ~ Weibull(1.5, 1),  x_n ~ Poisson(theta).
 * The running example for the transformed-density fixture.
 */
class WeibullPoisson final : public ModelBase<WeibullPoisson> {
 public:
  std::string name() const override { return "weibull_poisson"; }

  void validate(const Dataset& data) const override {
    for (long x : data.int_vector("x")) {
      if (x < 0) throw data_error("weibull_poisson: counts must be >= 0");
    }
  }

  std::vector<ParamBlock> blocks(const Dataset&) const override {
    return {{"theta", ConstraintSpec::lower_bounded(0.0), {}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.array("x").values.size();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const std::vector<long> x = data.int_vector("x");
    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, x.size(), [&](std::size_t n) {
      ll = ll + poisson_lpmf(x[n], theta[0]);
    });
    return weibull_lpdf(theta[0], 1.5, 1.0) + scale * ll;
  }

  bool has_predictive() const override { return true; }

  double predictive_log_density(const Dataset&, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    return poisson_lpmf(held_out.int_vector("x").at(row), theta[0]);
  }
};

}  // namespace

const Model& weibull_poisson_model() {
  static const WeibullPoisson model;
  return model;
}

}  // namespace advi
