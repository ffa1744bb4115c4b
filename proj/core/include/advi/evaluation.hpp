#pragma once

#include <functional>
#include <string>
#include <vector>

#include "advi/optimizer.hpp"

namespace advi {

/** Draws from a fitted approximation mapped back to the constrained space. */
struct PosteriorSampleSet {
  std::vector<std::string> names;  // flattened coordinate names
  Eigen::MatrixXd samples;         // one draw per row
  Eigen::VectorXd log_q;           // implicit constrained-space density
  Eigen::VectorXd log_joint;       // model log joint at each draw
};

/** S iid posterior draws; deterministic under the seed. */
PosteriorSampleSet draw_posterior(const Model& model, const Dataset& data,
                                  const Approximation& q,
                                  const TransformSet& transforms,
                                  std::size_t s, std::uint64_t seed);

/**
 * Average per-point held-out log predictive:
 * (1/J) sum_j log[(1/S) sum_s p(x_j | theta_s)], inner mean via log-sum-exp.
 */
double predictive_log_likelihood(const Model& model, const Dataset& train,
                                 const Dataset& held_out,
                                 const PosteriorSampleSet& samples);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // |refined - coarse| / 3 from grid halving
};

/**
 * KL(q || p) for a one-dimensional fit: trapezoid quadrature of
 * q(zeta) [log q(zeta) - log |J(zeta)| - log p(theta(zeta))] over
 * mean +/- 7.5 sd (more than 1 - 1e-10 of q's mass), at least 1e4 nodes.
 * The integrand equals the constrained-space KL integrand by change of
 * variables.  Throws std::domain_error if the integrand is not finite
 * everywhere on the grid.
 */
QuadratureResult kl_q_to_density(const MeanFieldGaussian& q,
                                 const TransformSet& transforms,
                                 const std::function<double(double)>& log_target,
                                 std::size_t nodes = 16384);

/** One cell of the transform-sensitivity study. */
struct KlStudyRow {
  PositiveTransform transform;
  double shape = 0.0;
  double rate = 0.0;
  double kl = 0.0;
  double error = 0.0;
};

/**
 * Mean-field fits to Gamma(1,2), Gamma(2.5,4.2) and Gamma(10,10) targets
 * under both positive transforms; returns the 2 x 3 grid of quadrature KL
 * values.  `seed` and `threads` come from the caller; everything else about
 * the fits is fixed here so the study is self-contained.
 */
std::vector<KlStudyRow> kl_transform_study(std::uint64_t seed,
                                           unsigned threads = 1);

/** Fixtures for the gradient-variance measurements. */
enum class VarianceFixture { gamma_10_10, tanh_regression };
const char* variance_fixture_name(VarianceFixture f);

struct VarianceReport {
  std::string estimator;  // "advi" or "bbvi"
  std::size_t m = 0;      // Monte Carlo samples per estimate
  std::size_t replications = 0;
  Eigen::VectorXd mean;      // per packed coordinate, over replications
  Eigen::VectorXd variance;  // unbiased, per packed coordinate
};

/**
 * Empirical estimator variance at a fixed reference point: the mean-field
 * approximation reached after exactly 100 ADVI iterations (eta_scale 1,
 * one gradient sample, seed-fixed) from the zero initialization.  For each
 * estimator and each M, `replications` independent estimates are reduced in
 * replication order, so results are bit-exact under a fixed seed.
 */
std::vector<VarianceReport> gradient_variance_study(
    VarianceFixture fixture, std::span<const std::size_t> ms,
    std::size_t replications, std::uint64_t seed, unsigned threads = 1);

/** Unbiased sample covariance (1/(S-1)) of draws stored as rows. */
Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& draws);
/** Same, restricted to selected columns of a posterior sample set. */
Eigen::MatrixXd empirical_covariance(const PosteriorSampleSet& samples,
                                     std::span<const std::size_t> coordinates);

/** Indices m with posterior mean alpha_m < 10 x the smallest mean (the
 *  dimensions the ARD prior kept). */
std::vector<std::size_t> ard_retained_dimensions(
    const Eigen::VectorXd& alpha_posterior_mean);

/*
 * Fixture targets used by the studies and the test suite.  These are not in
 * the model registry; they exist to make small, analytically tractable
 * optimization problems.
 */

/** One unconstrained coordinate with log joint N(theta; 0, 1); no data. */
const Model& standard_normal_target();
/** One positive coordinate, Gamma(shape, rate) read from the dataset. */
const Model& gamma_target();
Dataset make_gamma_target_data(double shape, double rate);
/** y_n ~ N(tanh(w . x_n), 1) with N(0,1) priors on w; a smooth non-conjugate
 *  regression used for variance measurements. */
const Model& tanh_regression();
Dataset make_tanh_regression_data(std::size_t n, std::size_t dim,
                                  std::uint64_t seed);

}  // namespace advi
