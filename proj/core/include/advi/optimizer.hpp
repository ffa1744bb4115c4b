#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "advi/variational.hpp"

namespace advi {

enum class Family : std::uint8_t { meanfield, fullrank };

/**
 * Constants of the adaptive step-size sequence
 *   rho_k(i) = eta_scale * i^(-1/2 + epsilon) / (tau + sqrt(s_k(i))),
 *   s_k(1) = g_k(1)^2,   s_k(i) = alpha g_k(i)^2 + (1 - alpha) s_k(i-1).
 */
struct StepSizeConfig {
  double eta_scale = 1.0;
  double alpha = 0.1;
  double tau = 1.0;
  double epsilon = 1e-16;
};

/** Per-coordinate adaptive step sizes; one instance per optimization run. */
class StepSizeState {
 public:
  StepSizeState(std::size_t dim, const StepSizeConfig& config)
      : config_(config), s_(Eigen::VectorXd::Zero(dim)) {}

  /** Advances one iteration and returns the elementwise step rho(i). */
  Eigen::VectorXd step(const Eigen::VectorXd& grad);

  /** Number of completed steps. */
  std::uint64_t iteration() const { return iteration_; }
  const Eigen::VectorXd& gradient_scale() const { return s_; }

  /** Restores mid-run state (gradient EWMA and completed step count). */
  void restore(const Eigen::VectorXd& s, std::uint64_t completed_steps) {
    s_ = s;
    iteration_ = completed_steps;
  }

 private:
  StepSizeConfig config_;
  Eigen::VectorXd s_;
  std::uint64_t iteration_ = 0;
};

/** Everything a fit run needs besides the model and the data. */
struct FitConfig {
  Family family = Family::meanfield;
  std::size_t grad_samples = 1;
  double eta_scale = 0.0;  // <= 0 selects from eta_candidates by pilot runs
  std::uint64_t seed = 0;
  std::size_t minibatch = 0;  // likelihood terms per step; 0 = full data
  std::size_t max_iters = 10000;
  double tol_rel = 1e-3;    // relative change of windowed ELBO means
  std::size_t window = 50;  // rolling window length (iterations)
  PositiveTransform positive = PositiveTransform::log;
  unsigned threads = 1;
  std::size_t retry_limit = 8;
  std::size_t pilot_iters = 200;
  std::size_t pilot_subset = 1000;
  std::vector<double> eta_candidates = {0.01, 0.1, 1.0, 10.0, 100.0};
  double alpha = 0.1;
  double tau = 1.0;
  double epsilon = 1e-16;
};

enum class Termination : std::uint8_t { converged, max_iters, diverged };
const char* termination_name(Termination t);

/**
 * One diagnostics row.  `seconds` is a deterministic virtual clock — total
 * autodiff nodes evaluated so far divided by a nominal 1e8 nodes/second — so
 * repeated runs with one seed produce identical diagnostics byte for byte.
 */
struct TracePoint {
  std::uint64_t iteration;
  double seconds;
  double elbo;
};

struct FitResult {
  Approximation q;
  TransformSet transforms;
  std::vector<ParamBlock> blocks;
  std::vector<TracePoint> trace;
  Termination termination = Termination::max_iters;
  std::string message;     // failure detail when diverged
  double eta_scale = 0.0;  // value actually used
  std::uint64_t iterations = 0;
  EstimatorCounters counters;
};

/** Nominal node rate that converts tape work into trace seconds. */
inline constexpr double kNodesPerSecond = 1e8;

/**
 * Stochastic-gradient ascent on the ELBO.  Deterministic given (model, data,
 * config); thread count changes nothing but wall time.  Throws
 * std::invalid_argument for inconsistent configuration (e.g. minibatch larger
 * than the data); optimization failures are reported in the result, not
 * thrown.
 */
FitResult fit(const Model& model, const Dataset& data, const FitConfig& config);

/**
 * Step-size selection: for each candidate (ascending), runs a fresh
 * `pilot_iters`-iteration fit with common random numbers on a fixed data
 * subset of at most `pilot_subset` points (likelihood rescaled), and returns
 * the candidate with the highest end-of-pilot windowed ELBO; ties go to the
 * smaller candidate.  Candidates that diverge are excluded; if all do,
 * diverged_error propagates.
 */
double search_eta_scale(const Model& model, const Dataset& data,
                        const FitConfig& config,
                        EstimatorCounters* counters = nullptr);

}  // namespace advi
