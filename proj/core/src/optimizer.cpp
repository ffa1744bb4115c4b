#include "advi/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace advi {

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::diverged: return "diverged";
  }
  return "?";
}

Eigen::VectorXd StepSizeState::step(const Eigen::VectorXd& grad) {
  ++iteration_;
  const Eigen::ArrayXd g2 = grad.array().square();
  if (iteration_ == 1) {
    s_ = g2;
  } else {
    s_ = config_.alpha * g2 + (1.0 - config_.alpha) * s_.array();
  }
  const double decay = std::pow(static_cast<double>(iteration_),
                                -0.5 + config_.epsilon);
  return config_.eta_scale * decay /
         (config_.tau + s_.array().sqrt());
}

namespace {

/** Last-two-window relative change of the ELBO trace; converged when the
 *  means of consecutive windows agree to tol_rel. */
class ConvergenceMonitor {
 public:
  ConvergenceMonitor(std::size_t window, double tol_rel)
      : window_(std::max<std::size_t>(1, window)), tol_rel_(tol_rel) {}

  bool push(double elbo) {
    values_.push_back(elbo);
    if (values_.size() < 2 * window_) return false;
    const auto last = values_.end();
    const double m1 =
        std::accumulate(last - window_, last, 0.0) / window_;
    const double m0 =
        std::accumulate(last - 2 * window_, last - window_, 0.0) / window_;
    const double rel =
        std::fabs(m1 - m0) / std::max(std::fabs(m0), 1e-12);
    return rel < tol_rel_;
  }

  /** Mean of the most recent window (smoothed objective). */
  double smoothed() const {
    const std::size_t n = std::min(window_, values_.size());
    if (n == 0) return -std::numeric_limits<double>::infinity();
    return std::accumulate(values_.end() - n, values_.end(), 0.0) / n;
  }

 private:
  std::size_t window_;
  double tol_rel_;
  std::vector<double> values_;
};

Approximation make_approximation(Family family, std::size_t dim) {
  if (family == Family::meanfield) {
    return MeanFieldGaussian(dim);
  }
  return FullRankGaussian(dim);
}

void apply_step(Approximation& q, const Eigen::VectorXd& rho,
                const Eigen::VectorXd& grad) {
  std::visit(
      [&](auto& g) {
        Eigen::VectorXd packed = g.pack();
        packed.array() += rho.array() * grad.array();
        if (!packed.allFinite()) {
          throw diverged_error("variational parameters left the finite range");
        }
        g.set_packed(packed);
      },
      q);
}

/** First `take` entries of a seeded partial Fisher-Yates shuffle of [0, n). */
class MinibatchSampler {
 public:
  MinibatchSampler(std::size_t n, std::size_t take) : indices_(n), take_(take) {
    std::iota(indices_.begin(), indices_.end(), std::size_t{0});
  }

  std::span<const std::size_t> draw(Rng& rng) {
    for (std::size_t j = 0; j < take_; ++j) {
      const std::size_t k =
          j + static_cast<std::size_t>(rng.uniform_below(indices_.size() - j));
      std::swap(indices_[j], indices_[k]);
    }
    return {indices_.data(), take_};
  }

 private:
  std::vector<std::size_t> indices_;
  std::size_t take_;
};

struct PilotRun {
  double end_elbo = -std::numeric_limits<double>::infinity();
  bool finished = false;
};

/** One fixed-budget optimization used for step-size selection. */
PilotRun run_pilot(const Model& model, const Dataset& data,
                   const TransformSet& transforms, const FitConfig& config,
                   double eta_scale, std::span<const std::size_t> subset,
                   double scale, EstimatorCounters* counters) {
  Approximation q =
      make_approximation(config.family, transforms.unconstrained_dim());
  StepSizeState steps(std::visit([](const auto& g) { return g.packed_dim(); },
                                 q),
                      {eta_scale, config.alpha, config.tau, config.epsilon});
  ConvergenceMonitor monitor(config.window, config.tol_rel);
  EstimatorOptions options{config.grad_samples, config.retry_limit,
                           config.threads};
  Rng rng(config.seed);  // common random numbers across candidates

  PilotRun out;
  try {
    for (std::size_t i = 0; i < config.pilot_iters; ++i) {
      GradientEstimate est = advi_gradient(model, data, transforms, q, subset,
                                           scale, rng, options, counters);
      monitor.push(est.elbo);
      apply_step(q, steps.step(est.grad), est.grad);
    }
  } catch (const diverged_error&) {
    return out;  // excluded from the search
  }
  out.end_elbo = monitor.smoothed();
  out.finished = std::isfinite(out.end_elbo);
  return out;
}

}  // namespace

double search_eta_scale(const Model& model, const Dataset& data,
                        const FitConfig& config, EstimatorCounters* counters) {
  const TransformSet transforms = transform_set(model, data, config.positive);
  const std::size_t n = model.observation_count(data);
  const std::size_t n_sub =
      std::min(n, std::max<std::size_t>(1, config.pilot_subset));

  // The pilot subset is drawn once and shared by every candidate.
  std::vector<std::size_t> subset;
  if (n_sub < n) {
    MinibatchSampler sampler(n, n_sub);
    Rng subset_rng(mix_seed(config.seed, 0x9d5u));
    std::span<const std::size_t> take = sampler.draw(subset_rng);
    subset.assign(take.begin(), take.end());
    std::sort(subset.begin(), subset.end());
  }
  const double scale = static_cast<double>(n) / static_cast<double>(n_sub);

  double best_eta = 0.0;
  double best_elbo = -std::numeric_limits<double>::infinity();
  std::vector<double> candidates = config.eta_candidates;
  std::sort(candidates.begin(), candidates.end());
  for (double eta : candidates) {  // ascending: ties keep the smaller eta
    if (!(eta > 0.0)) continue;
    PilotRun pilot = run_pilot(model, data, transforms, config, eta, subset,
                               n_sub < n ? scale : 1.0, counters);
    if (pilot.finished && pilot.end_elbo > best_elbo) {
      best_elbo = pilot.end_elbo;
      best_eta = eta;
    }
  }
  if (best_eta <= 0.0) {
    throw diverged_error(
        "no step-size candidate reached a finite objective in the pilot runs");
  }
  return best_eta;
}

FitResult fit(const Model& model, const Dataset& data,
              const FitConfig& config) {
  model.validate(data);
  const std::size_t n = model.observation_count(data);
  if (config.minibatch > n) {
    throw std::invalid_argument("minibatch size " +
                                std::to_string(config.minibatch) +
                                " exceeds the " + std::to_string(n) +
                                " observations");
  }
  if (config.max_iters == 0) {
    throw std::invalid_argument("max_iters must be at least 1");
  }

  FitResult result;
  result.blocks = model.blocks(data);
  result.transforms = transform_set(model, data, config.positive);

  try {
    result.eta_scale = config.eta_scale > 0.0
                           ? config.eta_scale
                           : search_eta_scale(model, data, config,
                                              &result.counters);
  } catch (const diverged_error& e) {
    result.termination = Termination::diverged;
    result.message = e.what();
    return result;
  }

  const std::size_t dim = result.transforms.unconstrained_dim();
  result.q = make_approximation(config.family, dim);
  StepSizeState steps(
      std::visit([](const auto& g) { return g.packed_dim(); }, result.q),
      {result.eta_scale, config.alpha, config.tau, config.epsilon});
  ConvergenceMonitor monitor(config.window, config.tol_rel);
  EstimatorOptions options{config.grad_samples, config.retry_limit,
                           config.threads};
  Rng rng(config.seed);

  const bool subsample = config.minibatch > 0 && config.minibatch < n;
  MinibatchSampler sampler(n, subsample ? config.minibatch : 0);
  const double scale =
      subsample ? static_cast<double>(n) / config.minibatch : 1.0;

  result.termination = Termination::max_iters;
  for (std::size_t i = 1; i <= config.max_iters; ++i) {
    std::span<const std::size_t> batch =
        subsample ? sampler.draw(rng) : std::span<const std::size_t>{};
    try {
      GradientEstimate est =
          advi_gradient(model, data, result.transforms, result.q, batch, scale,
                        rng, options, &result.counters);
      result.trace.push_back(
          {i, result.counters.tape_nodes / kNodesPerSecond, est.elbo});
      const bool converged = monitor.push(est.elbo);
      apply_step(result.q, steps.step(est.grad), est.grad);
      result.iterations = i;
      if (converged) {
        result.termination = Termination::converged;
        break;
      }
    } catch (const diverged_error& e) {
      result.termination = Termination::diverged;
      result.message = e.what();
      result.iterations = i;
      break;
    }
  }
  return result;
}

}  // namespace advi
