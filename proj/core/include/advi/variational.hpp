#pragma once

#include <Eigen/Core>
#include <variant>

#include "advi/models.hpp"
#include "advi/rng.hpp"
#include "advi/transforms.hpp"

namespace advi {

/** Raised when optimization cannot continue (non-finite state, degenerate
 *  covariance factor, or a gradient sample that keeps failing). */
class diverged_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Diagonal (mean-field) Gaussian over the unconstrained space, parameterized
 * by its mean and elementwise log standard deviation.  Packed layout:
 * [mu; omega].
 */
class MeanFieldGaussian {
 public:
  MeanFieldGaussian() = default;
  explicit MeanFieldGaussian(std::size_t dim)
      : mu(Eigen::VectorXd::Zero(dim)), omega(Eigen::VectorXd::Zero(dim)) {}

  std::size_t dim() const { return mu.size(); }
  std::size_t packed_dim() const { return 2 * dim(); }

  /** zeta = mu + exp(omega) .* eta for standard normal eta. */
  Eigen::VectorXd transport(const Eigen::VectorXd& eta) const {
    return mu.array() + omega.array().exp() * eta.array();
  }
  Eigen::VectorXd sample(Rng& rng) const;

  double entropy() const;
  double log_density(const Eigen::VectorXd& zeta) const;

  Eigen::VectorXd pack() const;
  void set_packed(const Eigen::VectorXd& packed);

  Eigen::VectorXd mu;
  Eigen::VectorXd omega;
};

/**
 * Full-rank Gaussian over the unconstrained space with covariance L L';
 * L is lower triangular.  Packed layout: [mu; row-major lower triangle of L].
 */
class FullRankGaussian {
 public:
  FullRankGaussian() = default;
  explicit FullRankGaussian(std::size_t dim)
      : mu(Eigen::VectorXd::Zero(dim)),
        L(Eigen::MatrixXd::Identity(dim, dim)) {}

  std::size_t dim() const { return mu.size(); }
  std::size_t packed_dim() const { return dim() + dim() * (dim() + 1) / 2; }

  /** zeta = mu + L eta for standard normal eta. */
  Eigen::VectorXd transport(const Eigen::VectorXd& eta) const {
    return mu + L.triangularView<Eigen::Lower>() * eta;
  }
  Eigen::VectorXd sample(Rng& rng) const;

  double entropy() const;
  double log_density(const Eigen::VectorXd& zeta) const;
  Eigen::MatrixXd covariance() const {
    Eigen::MatrixXd lower = L.triangularView<Eigen::Lower>();
    return lower * lower.transpose();
  }

  Eigen::VectorXd pack() const;
  void set_packed(const Eigen::VectorXd& packed);

  Eigen::VectorXd mu;
  Eigen::MatrixXd L;
};

using Approximation = std::variant<MeanFieldGaussian, FullRankGaussian>;

std::size_t approximation_dim(const Approximation& q);
double approximation_entropy(const Approximation& q);
Eigen::VectorXd approximation_mean(const Approximation& q);
/** Marginal standard deviations of the unconstrained coordinates. */
Eigen::VectorXd approximation_stddev(const Approximation& q);
Eigen::VectorXd sample_zeta(const Approximation& q, Rng& rng);

/**
 * Log density that the approximation induces on the constrained space:
 * log q(T(theta)) + log |det J_T(theta)|.  Evaluated through the encode map,
 * so it is exactly the density the fitted posterior assigns to theta.
 */
double log_density_constrained(const Approximation& q,
                               const TransformSet& transforms,
                               const Eigen::VectorXd& theta);

/** Packed-layout gradient estimate of the ELBO (objective value included). */
struct GradientEstimate {
  Eigen::VectorXd grad;
  double elbo = 0.0;
};

/** Counts accumulated across an optimization run. */
struct EstimatorCounters {
  std::uint64_t discarded_samples = 0;  // redrawn after a failed evaluation
  std::uint64_t clamp_events = 0;       // transform overflow guards
  std::uint64_t tape_nodes = 0;         // total autodiff nodes evaluated
};

/** Knobs shared by the Monte Carlo gradient estimators. */
struct EstimatorOptions {
  std::size_t samples = 1;     // Monte Carlo gradient samples per step
  std::size_t retry_limit = 8; // redraws allowed per sample before giving up
  unsigned threads = 1;
};

/**
 * Reparameterized ELBO gradient at q.  Each sample draws eta ~ N(0, I) on
 * its own stream (derived from one draw of `rng`), standardizes through q,
 * decodes, and back-propagates the log joint plus Jacobian through the tape;
 * entropy terms enter analytically.  Samples whose evaluation fails
 * (overflow, out-of-support, or a derived density argument degenerating to
 * zero) are redrawn up to retry_limit times and counted;
 * a sample that keeps failing raises diverged_error.  The likelihood part of
 * the model log joint is restricted to `minibatch` and multiplied by `scale`.
 * Results are independent of `threads`.
 */
GradientEstimate advi_gradient(const Model& model, const Dataset& data,
                               const TransformSet& transforms,
                               const Approximation& q,
                               std::span<const std::size_t> minibatch,
                               double scale, Rng& rng,
                               const EstimatorOptions& options,
                               EstimatorCounters* counters = nullptr);

/** Single-draw gradient contribution for a given standard normal eta; no
 *  retries, no entropy terms.  The raw estimator core, exposed for tests. */
GradientEstimate advi_gradient_at(const Model& model, const Dataset& data,
                                  const TransformSet& transforms,
                                  const Approximation& q,
                                  const Eigen::VectorXd& eta,
                                  std::span<const std::size_t> minibatch,
                                  double scale,
                                  EstimatorCounters* counters = nullptr);

/**
 * Score-function (black-box) ELBO gradient for the mean-field family: no
 * model gradients, double evaluation only, no variance reduction.  Layout and
 * retry policy match advi_gradient.
 */
GradientEstimate bbvi_gradient(const Model& model, const Dataset& data,
                               const TransformSet& transforms,
                               const MeanFieldGaussian& q, Rng& rng,
                               const EstimatorOptions& options,
                               EstimatorCounters* counters = nullptr);

}  // namespace advi
