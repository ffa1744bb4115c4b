#include <Eigen/Cholesky>

#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/**
 * Probabilistic PCA with automatic relevance determination, optionally
 * supervised by a scalar response sharing the latent code:
 *   z_n ~ N(0, I_M),  sigma ~ logNormal(0, 1),  alpha_m ~ InvGamma(1, 1),
 *   w_dm ~ N(0, sigma / sqrt(alpha_m)),  x_n ~ N(W z_n, sigma I_D),
 * and when supervised additionally
 *   w_y_m ~ N(0, sigma / sqrt(alpha_m)),  y_n ~ N(w_y . z_n, sigma).
 * Large alpha_m prunes latent dimension m.  Parameter order: z (N x M
 * row-major), w (D x M), [w_y (M),] sigma, alpha (M).
 */
class Ppca final : public ModelBase<Ppca> {
 public:
  explicit Ppca(bool supervised) : supervised_(supervised) {}

  std::string name() const override {
    return supervised_ ? "sup_ppca_ard" : "ppca_ard";
  }

  void validate(const Dataset& data) const override {
    const Eigen::MatrixXd x = data.matrix("x");
    if (x.rows() < 1 || x.cols() < 1) {
      throw data_error(name() + ": x must be non-empty");
    }
    if (latent_dim(data) < 1) throw data_error(name() + ": M must be >= 1");
    if (supervised_ && data.vector("y").size() != x.rows()) {
      throw data_error("sup_ppca_ard: y length and x rows differ");
    }
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const std::size_t n = data.matrix("x").rows();
    const std::size_t d = data.matrix("x").cols();
    const std::size_t m = latent_dim(data);
    std::vector<ParamBlock> out;
    out.push_back({"z", ConstraintSpec::unconstrained(n * m), {n, m}});
    out.push_back({"w", ConstraintSpec::unconstrained(d * m), {d, m}});
    if (supervised_) {
      out.push_back({"w_y", ConstraintSpec::unconstrained(m), {}});
    }
    out.push_back({"sigma", ConstraintSpec::lower_bounded(0.0), {}});
    out.push_back({"alpha", ConstraintSpec::lower_bounded(0.0, m), {}});
    return out;
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.matrix("x").rows();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Eigen::MatrixXd x = data.matrix("x");
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t m = latent_dim(data);

    std::size_t off = 0;
    std::span<const S> z = theta.subspan(off, n * m);
    off += n * m;
    std::span<const S> w = theta.subspan(off, d * m);
    off += d * m;
    std::span<const S> w_y =
        supervised_ ? theta.subspan(off, m) : std::span<const S>{};
    if (supervised_) off += m;
    const S& sigma = theta[off];
    std::span<const S> alpha = theta.subspan(off + 1, m);

    S lp = lognormal_lpdf(sigma, 0.0, 1.0);
    for (const S& a : alpha) lp = lp + inv_gamma_lpdf(a, 1.0, 1.0);
    for (const S& v : z) lp = lp + normal_lpdf(v, 0.0, 1.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        lp = lp + normal_lpdf(w[i * m + j], 0.0, sigma / sqrt(alpha[j]));
      }
    if (supervised_) {
      for (std::size_t j = 0; j < m; ++j)
        lp = lp + normal_lpdf(w_y[j], 0.0, sigma / sqrt(alpha[j]));
    }

    const Eigen::VectorXd y =
        supervised_ ? data.vector("y") : Eigen::VectorXd();
    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, n, [&](std::size_t i) {
      std::span<const S> z_i = z.subspan(i * m, m);
      for (std::size_t r = 0; r < d; ++r) {
        S mean = w[r * m] * z_i[0];
        for (std::size_t j = 1; j < m; ++j)
          mean = mean + w[r * m + j] * z_i[j];
        ll = ll + normal_lpdf(x(i, r), mean, sigma);
      }
      if (supervised_) {
        S mean = w_y[0] * z_i[0];
        for (std::size_t j = 1; j < m; ++j) mean = mean + w_y[j] * z_i[j];
        ll = ll + normal_lpdf(y[i], mean, sigma);
      }
    });
    return lp + scale * ll;
  }

  bool has_predictive() const override { return true; }

  /** New rows have their own latent code; marginalizing z ~ N(0, I) gives
   *  [x; y] ~ N(0, W_full W_full' + sigma^2 I) with W_full = [W; w_y']. */
  double predictive_log_density(const Dataset& train, const Dataset& held_out,
                                std::size_t row,
                                std::span<const double> theta) const override {
    const std::size_t n = train.matrix("x").rows();
    const std::size_t d = train.matrix("x").cols();
    const std::size_t m = latent_dim(train);
    const Eigen::MatrixXd x_new = held_out.matrix("x");
    if (static_cast<std::size_t>(x_new.cols()) != d) {
      throw data_error(name() + ": held-out x has wrong column count");
    }

    const std::size_t d_full = supervised_ ? d + 1 : d;
    Eigen::MatrixXd w_full(d_full, m);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t j = 0; j < m; ++j)
        w_full(r, j) = theta[n * m + r * m + j];
    if (supervised_) {
      for (std::size_t j = 0; j < m; ++j)
        w_full(d, j) = theta[n * m + d * m + j];
    }
    const double sigma = theta[n * m + d * m + (supervised_ ? m : 0)];

    Eigen::MatrixXd cov = w_full * w_full.transpose();
    cov.diagonal().array() += sigma * sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(name() + ": predictive covariance not SPD");
    }
    Eigen::VectorXd v(d_full);
    for (std::size_t r = 0; r < d; ++r) v[r] = x_new(row, r);
    if (supervised_) v[d] = held_out.vector("y")[row];

    const Eigen::MatrixXd chol = llt.matrixL();
    const double quad = llt.solve(v).dot(v);
    const double log_det = 2.0 * chol.diagonal().array().log().sum();
    return -0.5 * (d_full * math::log_two_pi() + log_det + quad);
  }

 private:
  bool supervised_;

  static std::size_t latent_dim(const Dataset& data) {
    if (!data.has("M")) return 8;
    const long m = data.integer("M");
    if (m < 1) throw data_error("ppca: M must be >= 1");
    return static_cast<std::size_t>(m);
  }
};

}  // namespace

const Model& ppca_ard_model() {
  static const Ppca model(false);
  return model;
}

const Model& sup_ppca_ard_model() {
  static const Ppca model(true);
  return model;
}

}  // namespace advi
