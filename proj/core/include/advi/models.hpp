#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advi/autodiff.hpp"
#include "advi/dataset.hpp"
#include "advi/transforms.hpp"

namespace advi {

/** One named parameter block with its constraint; `shape` is a display shape
 *  used for coordinate naming (empty = vector of total size).  A block with
 *  `groups` > 1 repeats the constraint over that many consecutive segments —
 *  e.g. a matrix whose rows are each a simplex. */
struct ParamBlock {
  std::string name;
  ConstraintSpec constraint;
  std::vector<std::size_t> shape;
  std::size_t groups = 1;

  std::size_t constrained_dim() const {
    return groups * constraint.constrained_dim();
  }
  std::size_t unconstrained_dim() const {
    return groups * constraint.unconstrained_dim();
  }
};

/**
 * A probability model over named data arrays and a flat constrained
 * parameter vector laid out block by block.  The log joint is exposed twice
 * with identical structure: on tape Vars (for gradients) and on plain doubles
 * (for value-only work such as score-function estimates, quadrature and
 * reference samplers).  Likelihood terms are restricted to the `minibatch`
 * observation indices (empty = all) and multiplied by `scale`; priors are
 * never scaled.
 */
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  /** Throws data_error unless the dataset matches the model's schema. */
  virtual void validate(const Dataset& data) const = 0;
  virtual std::vector<ParamBlock> blocks(const Dataset& data) const = 0;
  /** Number of exchangeable likelihood terms (the N of N/B scaling). */
  virtual std::size_t observation_count(const Dataset& data) const = 0;

  virtual Var log_joint(const Dataset& data, std::span<const Var> theta,
                        std::span<const std::size_t> minibatch,
                        double scale) const = 0;
  virtual double log_joint(const Dataset& data, std::span<const double> theta,
                           std::span<const std::size_t> minibatch,
                           double scale) const = 0;

  Var log_joint(const Dataset& data, std::span<const Var> theta) const {
    return log_joint(data, theta, {}, 1.0);
  }
  double log_joint(const Dataset& data, std::span<const double> theta) const {
    return log_joint(data, theta, {}, 1.0);
  }

  virtual bool has_predictive() const { return false; }
  /** Log density of one held-out row given constrained parameters. */
  virtual double predictive_log_density(const Dataset& train,
                                        const Dataset& held_out,
                                        std::size_t row,
                                        std::span<const double> theta) const;
};

/** Routes both virtual log_joint overloads to one generic implementation:
 *  Derived provides `template <class S> S eval_log_joint(...) const`. */
template <class Derived>
class ModelBase : public Model {
 public:
  Var log_joint(const Dataset& data, std::span<const Var> theta,
                std::span<const std::size_t> minibatch,
                double scale) const override {
    return static_cast<const Derived*>(this)->template eval_log_joint<Var>(
        data, theta, minibatch, scale);
  }
  double log_joint(const Dataset& data, std::span<const double> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const override {
    return static_cast<const Derived*>(this)->template eval_log_joint<double>(
        data, theta, minibatch, scale);
  }
  using Model::log_joint;
};

/** Applies f to each active observation index: the whole range [0, n) when
 *  `minibatch` is empty, otherwise exactly the minibatch indices. */
template <class F>
void for_each_observation(std::span<const std::size_t> minibatch,
                          std::size_t n, F&& f) {
  if (minibatch.empty()) {
    for (std::size_t i = 0; i < n; ++i) f(i);
  } else {
    for (std::size_t i : minibatch) f(i);
  }
}

/** All registered models, in registration order. */
std::span<const Model* const> model_registry();
/** nullptr if the name is unknown. */
const Model* find_model(std::string_view name);

/** The model's transform set, with the run-level positive-transform choice
 *  applied to every lower-bounded block. */
TransformSet transform_set(const Model& model, const Dataset& data,
                           PositiveTransform positive = PositiveTransform::log);

/** Flattened constrained coordinate names, "block.i" / "block.i.j", 1-based,
 *  row-major over each block's display shape. */
std::vector<std::string> coordinate_names(std::span<const ParamBlock> blocks);

/** Constrained-vector offset and length of a named block (first match). */
std::pair<std::size_t, std::size_t> block_range(
    std::span<const ParamBlock> blocks, std::string_view name);

/** Analytic posterior of the conjugate multivariate normal model. */
struct MvnPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
MvnPosterior mvn_conjugate_posterior(const Dataset& data);

/* Registered model singletons (also reachable through the registry). */
const Model& weibull_poisson_model();
const Model& mvn_conjugate_model();
const Model& logistic_regression_model();
const Model& stoch_vol_model();
const Model& linreg_ard_model();
const Model& hier_logistic_model();
const Model& gamma_poisson_nmf_model();
const Model& dirichlet_exponential_nmf_model();
const Model& gmm_model();
const Model& ppca_ard_model();
const Model& sup_ppca_ard_model();

}  // namespace advi
