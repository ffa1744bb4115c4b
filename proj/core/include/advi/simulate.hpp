#pragma once

#include "advi/dataset.hpp"
#include "advi/rng.hpp"

namespace advi {

/*
 * Synthetic datasets for every model in the registry, drawn from each model's
 * own generative process with documented ground-truth parameters.  The truth
 * is stored alongside the observations under "true_*" keys, which the models
 * ignore; tests use them as generation oracles.
 */

/** theta* ~ Weibull(1.5, 1), x_i ~ Poisson(theta*). */
Dataset simulate_weibull_poisson(std::size_t n, Rng& rng);

/** mu* ~ N(0, I), y_n ~ N(mu*, Sigma) with Sigma = 0.9-correlation matrix;
 *  Sigma is stored in the dataset. */
Dataset simulate_mvn_conjugate(std::size_t n, std::size_t dim, Rng& rng);

/** Intercept plus 9 standard normal covariates; beta* ~ N(0, I). */
Dataset simulate_logistic_regression(std::size_t n, Rng& rng);

/** AR(1) log-volatility chain started from its stationary law. */
Dataset simulate_stoch_vol(std::size_t t, Rng& rng, double mu = -1.025,
                           double phi = 0.9, double sigma = 0.6);

/** X entries N(0,1); the last dim/2 coefficients are exactly zero (inert),
 *  the rest N(0, 2^2); noise sd 0.5. */
Dataset simulate_linreg_ard(std::size_t n, std::size_t dim, Rng& rng);

/** Fixed effects b* = (0.4, -0.3, 0.5, -0.2, 1.5), all group scales 0.5,
 *  states assigned to regions round-robin, v_prev ~ Unif(0.4, 0.6). */
Dataset simulate_hier_logistic(std::size_t n, std::size_t n_age,
                               std::size_t n_edu, std::size_t n_region,
                               std::size_t n_state, Rng& rng);

/** theta*_u = sorted Gamma(1,1) draws, beta* ~ Gamma(1,1),
 *  y_ui ~ Poisson(theta_u . beta_i). */
Dataset simulate_gamma_poisson_nmf(std::size_t users, std::size_t items,
                                   std::size_t k, Rng& rng);

/** theta*_u ~ Dir(1000), beta* ~ Exponential(0.1). */
Dataset simulate_dirichlet_exponential_nmf(std::size_t users,
                                           std::size_t items, std::size_t k,
                                           Rng& rng);

/** Equal-weight mixture; component c sits at the hypercube corner with
 *  coordinates +/- separation given by the bits of c; all sds 0.5. */
Dataset simulate_gmm(std::size_t n, std::size_t k, std::size_t dim,
                     double separation, Rng& rng);

/** x_n = W z_n + 0.5 eps with W (dim x true_rank) entries N(0, 2^2) and
 *  z ~ N(0, I); the dataset requests a fit with latent dimension fit_rank. */
Dataset simulate_ppca(std::size_t n, std::size_t dim, std::size_t true_rank,
                      std::size_t fit_rank, Rng& rng);

/** simulate_ppca plus the response y_n = w_y . z_n + 0.5 eps; by default
 *  w_y = (2, 0, ..., 0), i.e. the response follows the first latent axis. */
Dataset simulate_sup_ppca(std::size_t n, std::size_t dim,
                          std::size_t true_rank, std::size_t fit_rank,
                          Rng& rng);

/** Marsaglia-Tsang Gamma(shape, 1) draw (shared with the test oracles). */
double gamma_draw(Rng& rng, double shape);

}  // namespace advi
