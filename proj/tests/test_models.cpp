#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "advi/models.hpp"
#include "advi/rng.hpp"
#include "advi/simulate.hpp"
#include "oracles.hpp"

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

double normal_ref(double x, double mu, double sd) {
  const double r = (x - mu) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * r * r;
}

double lognormal_ref(double x, double mu, double sd) {
  return normal_ref(std::log(x), mu, sd) - std::log(x);
}

double bernoulli_logit_ref(bool y, double logit) {
  return y ? -std::log1p(std::exp(-logit)) : -std::log1p(std::exp(logit));
}

/** Dense multivariate normal log density, used as a conjugacy oracle. */
double mvn_ref(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
               const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd r = x - mean;
  const Eigen::MatrixXd chol = llt.matrixL();
  const double log_det = 2.0 * chol.diagonal().array().log().sum();
  return -0.5 * (x.size() * kLogTwoPi + log_det + r.dot(llt.solve(r)));
}

/** Draws a feasible constrained point by decoding a mild unconstrained
 *  perturbation, then compares the on-tape gradient of the log joint with
 *  central finite differences of the double overload. */
void check_log_joint_gradient(const advi::Model& model,
                              const advi::Dataset& data, int points,
                              std::uint64_t seed) {
  const advi::TransformSet transforms = advi::transform_set(model, data);
  advi::Rng rng(seed);
  for (int rep = 0; rep < points; ++rep) {
    Eigen::VectorXd zeta(transforms.unconstrained_dim());
    for (Eigen::Index i = 0; i < zeta.size(); ++i) zeta[i] = 0.5 * rng.normal();
    const Eigen::VectorXd theta = transforms.decode(zeta).theta;

    advi::Tape tape;
    std::vector<advi::Var> vars;
    vars.reserve(theta.size());
    for (double t : theta) vars.push_back(tape.input(t));
    const advi::Var lp = model.log_joint(data, std::span<const advi::Var>(vars));
    const std::vector<double> grad = tape.gradient(lp, vars);

    const Eigen::VectorXd fd = oracle::fd_gradient(
        [&](const Eigen::VectorXd& x) {
          return model.log_joint(
              data, std::span<const double>(x.data(),
                                            static_cast<std::size_t>(x.size())));
        },
        theta);

    REQUIRE(lp.value() == doctest::Approx(model.log_joint(
                              data, std::span<const double>(
                                        theta.data(),
                                        static_cast<std::size_t>(theta.size()))))
                              .epsilon(1e-12));
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double denom =
          std::max({1.0, std::abs(grad[i]), std::abs(fd[i])});
      INFO(model.name() << " coordinate " << i << ": tape " << grad[i]
                        << " fd " << fd[i]);
      CHECK(std::abs(grad[i] - fd[i]) < 1e-5 * denom);
    }
  }
}

double log_joint_at(const advi::Model& model, const advi::Dataset& data,
                    const std::vector<double>& theta) {
  return model.log_joint(data, std::span<const double>(theta));
}

}  // namespace

TEST_CASE("registry lists every model exactly once") {
  const auto registry = advi::model_registry();
  CHECK(registry.size() == 11);
  for (const advi::Model* m : registry) {
    CHECK(advi::find_model(m->name()) == m);
  }
  CHECK(advi::find_model("no_such_model") == nullptr);
  CHECK(advi::find_model("gmm") == &advi::gmm_model());
}

TEST_CASE("coordinate names and block ranges follow the declared layout") {
  advi::Dataset data;
  Eigen::MatrixXd y(2, 2);
  y << 0.0, 1.0, -1.0, 0.5;
  data.set_matrix("y", y);
  data.set_scalar("K", 2.0);
  const auto blocks = advi::gmm_model().blocks(data);
  const auto names = advi::coordinate_names(blocks);
  const std::vector<std::string> expect = {
      "theta.1", "theta.2", "mu.1.1",    "mu.1.2",    "mu.2.1",   "mu.2.2",
      "sigma.1.1", "sigma.1.2", "sigma.2.1", "sigma.2.2"};
  REQUIRE(names.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(names[i] == expect[i]);

  const auto [mu_off, mu_len] = advi::block_range(blocks, "mu");
  CHECK(mu_off == 2);
  CHECK(mu_len == 4);
  const auto [sig_off, sig_len] = advi::block_range(blocks, "sigma");
  CHECK(sig_off == 6);
  CHECK(sig_len == 4);
  CHECK_THROWS_AS(advi::block_range(blocks, "nope"), std::out_of_range);
}

TEST_CASE("tape gradients of every model match finite differences") {
  advi::Rng rng(20240817);
  check_log_joint_gradient(advi::weibull_poisson_model(),
                           advi::simulate_weibull_poisson(10, rng), 5, 11);
  check_log_joint_gradient(advi::mvn_conjugate_model(),
                           advi::simulate_mvn_conjugate(8, 2, rng), 5, 12);
  check_log_joint_gradient(advi::logistic_regression_model(),
                           advi::simulate_logistic_regression(20, rng), 5, 13);
  check_log_joint_gradient(advi::stoch_vol_model(),
                           advi::simulate_stoch_vol(12, rng), 5, 14);
  check_log_joint_gradient(advi::linreg_ard_model(),
                           advi::simulate_linreg_ard(15, 4, rng), 5, 15);
  check_log_joint_gradient(advi::hier_logistic_model(),
                           advi::simulate_hier_logistic(40, 2, 3, 2, 4, rng), 5,
                           16);
  check_log_joint_gradient(advi::gamma_poisson_nmf_model(),
                           advi::simulate_gamma_poisson_nmf(4, 3, 2, rng), 5,
                           17);
  check_log_joint_gradient(advi::dirichlet_exponential_nmf_model(),
                           advi::simulate_dirichlet_exponential_nmf(4, 3, 2, rng),
                           5, 18);
  check_log_joint_gradient(advi::gmm_model(),
                           advi::simulate_gmm(20, 2, 2, 2.0, rng), 5, 19);
  check_log_joint_gradient(advi::ppca_ard_model(),
                           advi::simulate_ppca(12, 5, 2, 3, rng), 5, 20);
  check_log_joint_gradient(advi::sup_ppca_ard_model(),
                           advi::simulate_sup_ppca(12, 5, 2, 3, rng), 5, 21);
}

TEST_CASE("conjugate normal model matches its analytic posterior") {
  SUBCASE("identity covariance, single observation") {
    advi::Dataset data;
    Eigen::MatrixXd y(1, 2);
    y << 0.8, -0.4;
    data.set_matrix("y", y);
    data.set_matrix("Sigma", Eigen::MatrixXd::Identity(2, 2));
    const advi::MvnPosterior post = advi::mvn_conjugate_posterior(data);
    CHECK(post.mean[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(post.mean[1] == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK((post.covariance - 0.5 * Eigen::MatrixXd::Identity(2, 2)).norm() <
          1e-12);
  }

  SUBCASE("no observations leaves the standard normal prior") {
    advi::Dataset data;
    data.set_matrix("y", Eigen::MatrixXd(0, 2));
    data.set_matrix("Sigma", Eigen::MatrixXd::Identity(2, 2));
    const advi::MvnPosterior post = advi::mvn_conjugate_posterior(data);
    CHECK(post.mean.norm() < 1e-14);
    CHECK((post.covariance - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  }

  SUBCASE("log joint differences equal posterior density differences") {
    // Conjugacy: p(theta | y) ~ p(theta, y), so the data normalizer cancels
    // in differences between two parameter points.
    advi::Rng rng(99);
    const advi::Dataset data = advi::simulate_mvn_conjugate(6, 3, rng);
    const advi::MvnPosterior post = advi::mvn_conjugate_posterior(data);
    const advi::Model& model = advi::mvn_conjugate_model();
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd a(3), b(3);
      for (int i = 0; i < 3; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
      }
      const double lhs =
          model.log_joint(data, std::span<const double>(a.data(), 3)) -
          model.log_joint(data, std::span<const double>(b.data(), 3));
      const double rhs = mvn_ref(a, post.mean, post.covariance) -
                         mvn_ref(b, post.mean, post.covariance);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("mixture log joint matches direct summation") {
  advi::Dataset data;
  Eigen::MatrixXd y(3, 2);
  y << 0.4, -0.2, 1.1, 0.9, -0.7, 0.3;
  data.set_matrix("y", y);
  data.set_scalar("K", 2.0);
  const advi::Model& model = advi::gmm_model();

  // theta (2), mu (2x2), sigma (2x2), all strictly feasible.
  const std::vector<double> theta = {0.6, 0.4, 0.2, -0.1, 0.8,
                                     1.2, 0.9, 1.1,  0.7, 1.3};

  double expect = 0.0;
  {
    // Dir(1000, 1000) density written out directly.
    const double alpha = 1000.0;
    expect += std::lgamma(2 * alpha) - 2 * std::lgamma(alpha) +
              (alpha - 1) * (std::log(theta[0]) + std::log(theta[1]));
    for (int j = 0; j < 4; ++j) {
      expect += normal_ref(theta[2 + j], 0.0, 1.0);
      expect += lognormal_ref(theta[6 + j], 0.0, 1.0);
    }
    for (int n = 0; n < 3; ++n) {
      double density = 0.0;
      for (int c = 0; c < 2; ++c) {
        double comp = std::log(theta[c]);
        for (int d = 0; d < 2; ++d) {
          comp += normal_ref(y(n, d), theta[2 + c * 2 + d], theta[6 + c * 2 + d]);
        }
        density += std::exp(comp);
      }
      expect += std::log(density);
    }
  }
  CHECK(log_joint_at(model, data, theta) ==
        doctest::Approx(expect).epsilon(1e-10));

  SUBCASE("relabeling the components leaves the joint unchanged") {
    const std::vector<double> swapped = {0.4, 0.6, 0.8, 1.2, 0.2,
                                         -0.1, 0.7, 1.3, 0.9, 1.1};
    CHECK(log_joint_at(model, data, swapped) ==
          doctest::Approx(log_joint_at(model, data, theta)).epsilon(1e-12));
  }
}

TEST_CASE("single-component mixture drops the weight block") {
  advi::Dataset data;
  Eigen::MatrixXd y(2, 1);
  y << 0.5, -1.0;
  data.set_matrix("y", y);
  data.set_scalar("K", 1.0);
  const auto blocks = advi::gmm_model().blocks(data);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].name == "mu");
  CHECK(blocks[1].name == "sigma");

  const std::vector<double> theta = {0.3, 0.9};  // mu, sigma
  const double expect = normal_ref(0.3, 0.0, 1.0) + lognormal_ref(0.9, 0.0, 1.0) +
                        normal_ref(0.5, 0.3, 0.9) + normal_ref(-1.0, 0.3, 0.9);
  CHECK(log_joint_at(advi::gmm_model(), data, theta) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rank-one count factorization is conditionally conjugate") {
  // With K = 1 and the item factors held fixed, the user factor's full
  // conditional is Gamma(1 + sum_i y_ui, 1 + sum_i beta_i); log joint
  // differences in theta_u must match that density's differences.
  advi::Dataset data;
  Eigen::MatrixXd y(2, 3);
  y << 4, 0, 2, 1, 3, 0;
  data.set_matrix("Y", y);
  data.set_scalar("K", 1.0);
  const advi::Model& model = advi::gamma_poisson_nmf_model();
  REQUIRE(model.blocks(data).size() == 2);

  const double beta1 = 0.7, beta2 = 1.4, beta3 = 0.2;
  const double beta_sum = beta1 + beta2 + beta3;
  const double a = 0.9, b = 2.3;  // two values for theta_1
  std::vector<double> ta = {a, 1.1, beta1, beta2, beta3};
  std::vector<double> tb = {b, 1.1, beta1, beta2, beta3};
  const double lhs = log_joint_at(model, data, ta) - log_joint_at(model, data, tb);
  const double y_sum = 4 + 0 + 2;
  const double rhs =
      y_sum * (std::log(a) - std::log(b)) - (1.0 + beta_sum) * (a - b);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
}

TEST_CASE("volatility chain with zero persistence collapses to iid terms") {
  advi::Dataset data;
  Eigen::VectorXd y(4);
  y << 0.3, -1.2, 0.8, 0.1;
  data.set_vector("y", y);
  const advi::Model& model = advi::stoch_vol_model();

  const double mu = -0.9, sigma = 0.55;
  const std::vector<double> h = {-1.1, -0.6, -1.4, -0.8};
  std::vector<double> theta = {mu, 0.0, sigma, h[0], h[1], h[2], h[3]};

  // Cauchy(0, 10) at mu, Unif(-1,1) at 0, logNormal(0, 10) at sigma.
  double expect = -std::log(std::numbers::pi * 10.0 *
                            (1.0 + (mu / 10.0) * (mu / 10.0))) -
                  std::log(2.0) + lognormal_ref(sigma, 0.0, 10.0);
  for (int t = 0; t < 4; ++t) {
    expect += normal_ref(h[t], mu, sigma);
    expect += normal_ref(y[t], 0.0, std::exp(0.5 * h[t]));
  }
  CHECK(log_joint_at(model, data, theta) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("multilevel logistic log joint matches a hand computation") {
  advi::Dataset data;
  Eigen::VectorXd y(3), female(3), black(3);
  y << 1, 0, 1;
  female << 0, 1, 0;
  black << 0, 0, 1;
  Eigen::VectorXd age(3), edu(3), state(3), region(2), v_prev(2);
  age << 1, 2, 1;
  edu << 1, 1, 2;
  state << 1, 2, 2;
  region << 1, 1;
  v_prev << 0.5, 0.45;
  data.set_vector("y", y);
  data.set_vector("female", female);
  data.set_vector("black", black);
  data.set_vector("age", age);
  data.set_vector("edu", edu);
  data.set_vector("state", state);
  data.set_vector("region", region);
  data.set_vector("v_prev", v_prev);

  const advi::Model& model = advi::hier_logistic_model();
  model.validate(data);
  // b (5), alpha_age (2), alpha_edu (2), alpha_age_edu (4), alpha_region (1),
  // alpha_state (2), then five interval-constrained scales.
  const std::vector<double> theta = {
      0.4,  -0.3, 0.5, -0.2, 1.5,        // b
      0.1,  -0.2,                        // alpha_age
      0.05, -0.1,                        // alpha_edu
      0.2,  -0.15, 0.1, 0.0,             // alpha_age_edu (row-major age x edu)
      0.3,                               // alpha_region
      0.25, -0.35,                       // alpha_state
      0.6,  0.7,  0.8, 0.9, 1.1};        // sigma_age..sigma_state
  REQUIRE(theta.size() ==
          advi::transform_set(model, data).constrained_dim());

  double expect = 5 * -std::log(100.0);
  expect += normal_ref(0.1, 0.0, 0.6) + normal_ref(-0.2, 0.0, 0.6);
  expect += normal_ref(0.05, 0.0, 0.7) + normal_ref(-0.1, 0.0, 0.7);
  for (double a : {0.2, -0.15, 0.1, 0.0}) expect += normal_ref(a, 0.0, 0.8);
  expect += normal_ref(0.3, 0.0, 0.9);
  expect += normal_ref(0.25, 0.3 + 1.5 * 0.5, 1.1) +
            normal_ref(-0.35, 0.3 + 1.5 * 0.45, 1.1);

  const double eta1 = 0.4 + 0.1 + 0.05 + 0.2 + 0.25;           // obs 1
  const double eta2 = 0.4 - 0.3 - 0.2 + 0.05 + 0.1 - 0.35;     // obs 2
  const double eta3 = 0.4 + 0.5 + 0.1 - 0.1 - 0.15 - 0.35;     // obs 3
  expect += bernoulli_logit_ref(true, eta1) + bernoulli_logit_ref(false, eta2) +
            bernoulli_logit_ref(true, eta3);

  CHECK(log_joint_at(model, data, theta) ==
        doctest::Approx(expect).epsilon(1e-12));

  SUBCASE("schema violations are rejected") {
    advi::Dataset bad = data;
    Eigen::VectorXd wrong(3);
    wrong << 1, 2, 1;
    bad.set_vector("y", wrong);
    CHECK_THROWS_AS(model.validate(bad), advi::data_error);

    advi::Dataset bad_index = data;
    Eigen::VectorXd st(3);
    st << 1, 2, 3;  // state 3 does not exist
    bad_index.set_vector("state", st);
    CHECK_THROWS_AS(model.validate(bad_index), advi::data_error);
  }
}

TEST_CASE("regression with no rows reduces to its priors") {
  advi::Dataset data;
  data.set_matrix("X", Eigen::MatrixXd(0, 2));
  data.set_vector("y", Eigen::VectorXd(0));
  const advi::Model& model = advi::linreg_ard_model();
  model.validate(data);
  CHECK(model.observation_count(data) == 0);

  const double sigma = 0.8, a1 = 1.3, a2 = 0.4, w1 = 0.2, w2 = -0.9;
  const std::vector<double> theta = {sigma, a1, a2, w1, w2};
  // InvGamma(1,1): -2 log s - 1/s.  Gamma(1,1): -a.
  double expect = -2.0 * std::log(sigma) - 1.0 / sigma - a1 - a2;
  expect += normal_ref(w1, 0.0, sigma / std::sqrt(a1));
  expect += normal_ref(w2, 0.0, sigma / std::sqrt(a2));
  CHECK(log_joint_at(model, data, theta) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("latent factor log joint matches a hand computation") {
  advi::Dataset data;
  Eigen::MatrixXd x(2, 3);
  x << 0.6, -0.2, 1.0, -0.4, 0.9, 0.3;
  data.set_matrix("x", x);
  data.set_scalar("M", 2.0);
  const advi::Model& model = advi::ppca_ard_model();

  // z (2x2), w (3x2), sigma, alpha (2).
  const std::vector<double> theta = {0.5, -0.3, 0.1,  0.7,  0.4, -0.6,
                                     0.2, 0.9,  -0.1, 0.35, 0.8, 1.4,
                                     0.6};
  REQUIRE(theta.size() == advi::transform_set(model, data).constrained_dim());
  const double sigma = 0.8;
  const double alpha1 = 1.4, alpha2 = 0.6;

  double expect = lognormal_ref(sigma, 0.0, 1.0);
  for (double a : {alpha1, alpha2}) expect += -2.0 * std::log(a) - 1.0 / a;
  for (int j = 0; j < 4; ++j) expect += normal_ref(theta[j], 0.0, 1.0);
  const double w[3][2] = {{0.4, -0.6}, {0.2, 0.9}, {-0.1, 0.35}};
  for (int r = 0; r < 3; ++r) {
    expect += normal_ref(w[r][0], 0.0, sigma / std::sqrt(alpha1));
    expect += normal_ref(w[r][1], 0.0, sigma / std::sqrt(alpha2));
  }
  const double z[2][2] = {{0.5, -0.3}, {0.1, 0.7}};
  for (int n = 0; n < 2; ++n)
    for (int r = 0; r < 3; ++r) {
      const double mean = w[r][0] * z[n][0] + w[r][1] * z[n][1];
      expect += normal_ref(x(n, r), mean, sigma);
    }
  CHECK(log_joint_at(model, data, theta) ==
        doctest::Approx(expect).epsilon(1e-12));

  SUBCASE("supervised variant inserts the response loading block") {
    advi::Dataset sup = data;
    Eigen::VectorXd yv(2);
    yv << 0.2, -0.5;
    sup.set_vector("y", yv);
    const auto blocks = advi::sup_ppca_ard_model().blocks(sup);
    REQUIRE(blocks.size() == 5);
    CHECK(blocks[2].name == "w_y");
    CHECK(blocks[2].constrained_dim() == 2);
  }
}

TEST_CASE("factor predictive density marginalizes the latent code") {
  advi::Dataset train;
  Eigen::MatrixXd x(2, 2);
  x << 0.1, -0.2, 0.4, 0.3;
  train.set_matrix("x", x);
  train.set_scalar("M", 1.0);
  advi::Dataset held;
  Eigen::MatrixXd xh(1, 2);
  xh << 0.7, -0.1;
  held.set_matrix("x", xh);

  // z (2x1), w (2x1) = (1.2, -0.5), sigma = 0.6, alpha = 1.0.
  const std::vector<double> theta = {0.0, 0.0, 1.2, -0.5, 0.6, 1.0};
  Eigen::MatrixXd cov(2, 2);
  cov << 1.2 * 1.2 + 0.36, 1.2 * -0.5, 1.2 * -0.5, 0.25 + 0.36;
  Eigen::VectorXd v(2);
  v << 0.7, -0.1;
  const double expect = mvn_ref(v, Eigen::VectorXd::Zero(2), cov);
  CHECK(advi::ppca_ard_model().predictive_log_density(
            train, held, 0, std::span<const double>(theta)) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("logit regression obeys label-flip symmetry") {
  advi::Dataset data;
  Eigen::MatrixXd x(3, 2);
  x << 1.0, 0.4, 1.0, -1.2, 1.0, 0.9;
  Eigen::VectorXd y(3), flipped(3);
  y << 1, 0, 1;
  flipped << 0, 1, 0;
  data.set_matrix("X", x);
  data.set_vector("y", y);
  advi::Dataset mirror = data;
  mirror.set_vector("y", flipped);

  const advi::Model& model = advi::logistic_regression_model();
  const std::vector<double> beta = {0.3, -0.7};
  const std::vector<double> neg = {-0.3, 0.7};
  CHECK(log_joint_at(model, data, beta) ==
        doctest::Approx(log_joint_at(model, mirror, neg)).epsilon(1e-12));

  // And the absolute value at one point, written out.
  const double eta1 = 0.3 + 0.4 * -0.7;
  const double eta2 = 0.3 - 1.2 * -0.7;
  const double eta3 = 0.3 + 0.9 * -0.7;
  const double expect = normal_ref(0.3, 0.0, 1.0) + normal_ref(-0.7, 0.0, 1.0) +
                        bernoulli_logit_ref(true, eta1) +
                        bernoulli_logit_ref(false, eta2) +
                        bernoulli_logit_ref(true, eta3);
  CHECK(log_joint_at(model, data, beta) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("count model reference values") {
  const advi::Model& model = advi::weibull_poisson_model();

  advi::Dataset one;
  Eigen::VectorXd x1(1);
  x1 << 0;
  one.set_vector("x", x1);
  // Weibull(1.5, 1) at 1: log 1.5 - 1; Poisson(0 | 1): -1.
  CHECK(log_joint_at(model, one, {1.0}) ==
        doctest::Approx(std::log(1.5) - 2.0).epsilon(1e-12));

  advi::Dataset empty;
  empty.set_vector("x", Eigen::VectorXd(0));
  CHECK(model.observation_count(empty) == 0);
  CHECK(log_joint_at(model, empty, {1.0}) ==
        doctest::Approx(std::log(1.5) - 1.0).epsilon(1e-12));

  // A tiny rate is far into the prior tail but still finite.
  advi::Dataset three;
  Eigen::VectorXd x3(1);
  x3 << 3;
  three.set_vector("x", x3);
  const double lp = log_joint_at(model, three, {1e-300});
  CHECK(std::isfinite(lp));
  CHECK(lp < -1000.0);

  advi::Dataset bad;
  Eigen::VectorXd xb(2);
  xb << 1, -2;
  bad.set_vector("x", xb);
  CHECK_THROWS_AS(model.validate(bad), advi::data_error);
}

TEST_CASE("minibatch scaling touches only the selected observations") {
  advi::Rng rng(7);
  const advi::Dataset data = advi::simulate_logistic_regression(6, rng);
  const advi::Model& model = advi::logistic_regression_model();
  const std::vector<double> beta = {0.2, -0.4, 0.6};

  const double full =
      model.log_joint(data, std::span<const double>(beta), {}, 1.0);
  const double full_explicit = model.log_joint(
      data, std::span<const double>(beta), std::vector<std::size_t>{}, 1.0);
  CHECK(full == doctest::Approx(full_explicit).epsilon(1e-15));

  // Sum of scale-1 singleton minibatches minus 5 extra priors = full joint.
  double sum = 0.0;
  for (std::size_t n = 0; n < 6; ++n) {
    const std::vector<std::size_t> batch = {n};
    sum += model.log_joint(data, std::span<const double>(beta), batch, 1.0);
  }
  const std::vector<std::size_t> none_idx = {0};
  const double one_obs =
      model.log_joint(data, std::span<const double>(beta), none_idx, 0.0);
  // one_obs is the bare prior (likelihood scaled to zero).
  CHECK(sum - 5.0 * one_obs == doctest::Approx(full).epsilon(1e-12));

  // Scaling multiplies only the likelihood part.
  const std::vector<std::size_t> batch = {2, 4};
  const double s1 =
      model.log_joint(data, std::span<const double>(beta), batch, 1.0);
  const double s3 =
      model.log_joint(data, std::span<const double>(beta), batch, 3.0);
  CHECK(s3 - one_obs == doctest::Approx(3.0 * (s1 - one_obs)).epsilon(1e-12));
}
