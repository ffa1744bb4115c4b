#include <Eigen/Dense>

#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

Eigen::MatrixXd observation_covariance(const Dataset& data,
                                       Eigen::Index dim) {
  if (data.has("Sigma")) {
    Eigen::MatrixXd sigma = data.matrix("Sigma");
    if (sigma.rows() != dim || sigma.cols() != dim) {
      throw data_error("mvn_conjugate: Sigma must be " + std::to_string(dim) +
                       "x" + std::to_string(dim));
    }
    return sigma;
  }
  // Default: unit variances with strong 0.9 pairwise correlation.
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(dim, dim, 0.9);
  sigma.diagonal().setOnes();
  return sigma;
}

/**
 * Multivariate normal observations with a fixed, highly correlated
 * covariance and a standard normal prior on the unknown mean:
 *   mu ~ N(0, I),  y_n ~ N(mu, Sigma).
 * Conjugate, so the exact posterior is available for oracles.
 */
class MvnConjugate final : public ModelBase<MvnConjugate> {
 public:
  std::string name() const override { return "mvn_conjugate"; }

  void validate(const Dataset& data) const override {
    const Eigen::MatrixXd y = data.matrix("y");
    if (y.cols() < 2) {
      throw data_error("mvn_conjugate: y must have at least 2 columns");
    }
    const Eigen::MatrixXd sigma = observation_covariance(data, y.cols());
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      throw data_error("mvn_conjugate: Sigma must be positive definite");
    }
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t d = data.matrix("y").cols();
    return {{"mu", ConstraintSpec::unconstrained(d), {}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.matrix("y").rows();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::MatrixXd y = data.matrix("y");
    const Eigen::Index d = y.cols();
    const Eigen::MatrixXd sigma = observation_covariance(data, d);
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    const Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::MatrixXd chol = llt.matrixL();
    const double log_norm =
        -0.5 * (d * math::log_two_pi() +
                2.0 * chol.diagonal().array().log().sum());

    S lp = normal_lpdf(theta[0], 0.0, 1.0);
    for (Eigen::Index j = 1; j < d; ++j)
      lp = lp + normal_lpdf(theta[j], 0.0, 1.0);

    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, y.rows(), [&](std::size_t n) {
      // -1/2 (y_n - mu)^T Sigma^-1 (y_n - mu) + log normalizer
      S quad = detail::zero_like(theta);
      for (Eigen::Index a = 0; a < d; ++a) {
        S ra = y(n, a) - theta[a];
        quad = quad + prec(a, a) * square(ra);
        for (Eigen::Index b = a + 1; b < d; ++b) {
          quad = quad + (2.0 * prec(a, b)) * (ra * (y(n, b) - theta[b]));
        }
      }
      ll = ll + (-0.5 * quad + log_norm);
    });
    return lp + scale * ll;
  }

  bool has_predictive() const override { return true; }

  double predictive_log_density(const Dataset& train, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    const Eigen::MatrixXd y = held_out.matrix("y");
    const Eigen::Index d = y.cols();
    const Eigen::MatrixXd sigma = observation_covariance(train, d);
    const Eigen::VectorXd mu =
        Eigen::Map<const Eigen::VectorXd>(theta.data(), d);
    const Eigen::VectorXd r = y.row(row).transpose() - mu;
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    const double quad = r.dot(llt.solve(r));
    const Eigen::MatrixXd chol = llt.matrixL();
    const double log_det = 2.0 * chol.diagonal().array().log().sum();
    return -0.5 * (d * math::log_two_pi() + log_det + quad);
  }
};

}  // namespace

const Model& mvn_conjugate_model() {
  static const MvnConjugate model;
  return model;
}

MvnPosterior mvn_conjugate_posterior(const Dataset& data) {
  const Eigen::MatrixXd y = data.matrix("y");
  const Eigen::Index d = y.cols();
  const Eigen::MatrixXd sigma = observation_covariance(data, d);
  const Eigen::MatrixXd prec_obs =
      sigma.llt().solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd post_prec =
      Eigen::MatrixXd::Identity(d, d) + y.rows() * prec_obs;
  MvnPosterior out;
  out.covariance = post_prec.llt().solve(Eigen::MatrixXd::Identity(d, d));
  out.mean = out.covariance * (prec_obs * y.colwise().sum().transpose());
  return out;
}

}  // namespace advi
