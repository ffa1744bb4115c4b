#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advi/autodiff.hpp"
#include "advi/math.hpp"

namespace advi {

/** Raised when a constrained value violates its constraint (encode side). */
class constraint_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class ConstraintKind : std::uint8_t {
  unconstrained,
  lower_bounded,
  upper_bounded,
  interval,
  ordered,
  positive_ordered,
  simplex,
};

/** Flavor of the positive (lower-bounded) transform: theta = lb + exp(zeta),
 *  or the softplus alternative theta = lb + log(1 + exp(zeta)). */
enum class PositiveTransform : std::uint8_t { log, softplus };

/**
 * Constraint attached to one parameter block.  Scalar kinds (lower_bounded,
 * upper_bounded, interval, unconstrained) apply elementwise over `size`
 * coordinates; ordered / positive_ordered / simplex constrain the block as a
 * vector.  A simplex of size K has K-1 unconstrained coordinates; every other
 * kind maps dimension one-to-one.
 */
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::unconstrained;
  double lb = 0.0;
  double ub = 0.0;
  std::size_t size = 1;
  PositiveTransform positive = PositiveTransform::log;

  std::size_t constrained_dim() const { return size; }
  std::size_t unconstrained_dim() const {
    return kind == ConstraintKind::simplex ? size - 1 : size;
  }

  static ConstraintSpec unconstrained(std::size_t n = 1);
  static ConstraintSpec lower_bounded(
      double lb, std::size_t n = 1,
      PositiveTransform positive = PositiveTransform::log);
  static ConstraintSpec upper_bounded(double ub, std::size_t n = 1);
  static ConstraintSpec interval(double lb, double ub, std::size_t n = 1);
  static ConstraintSpec ordered(std::size_t n);
  static ConstraintSpec positive_ordered(std::size_t n);
  static ConstraintSpec simplex(std::size_t n);
};

/** Counts of overflow-guard clamp events observed while decoding. */
struct TransformCounters {
  std::uint64_t clamp_events = 0;
};

/** Result of mapping an unconstrained point back to the constrained space. */
struct TransformedPoint {
  Eigen::VectorXd theta;
  double log_abs_det_jacobian = 0.0;
};

namespace detail {

// Arguments of exp are clamped at +/-700 and arguments of the logistic at
// +/-36 before use, so decoded values stay finite and strictly inside their
// constraints in floating point.  Exponents that offset a nonzero bound are
// additionally floored so the offset stays above one ulp of the bound and
// cannot round onto it.  Events are counted in TransformCounters.
inline constexpr double kExpClamp = 700.0;
inline constexpr double kLogisticClamp = 36.0;

template <class S>
S guarded(const S& z, double bound, TransformCounters* counters) {
  if (counters != nullptr && std::fabs(value_of(z)) > bound) {
    ++counters->clamp_events;
  }
  return clamp(z, -bound, bound);
}

/** Smallest exponent argument that keeps `bound` +/- exp(z) strictly off the
 *  bound in floating point; a zero bound needs only finiteness. */
inline double exp_floor(double bound) {
  if (bound == 0.0) return -kExpClamp;
  return std::max(-kExpClamp, std::log(std::fabs(bound)) - kLogisticClamp);
}

template <class S>
S guarded_range(const S& z, double lo, double hi, TransformCounters* counters) {
  const double v = value_of(z);
  if (counters != nullptr && (v < lo || v > hi)) {
    ++counters->clamp_events;
  }
  return clamp(z, lo, hi);
}

/**
 * Decode one block: theta[i] = T^-1(zeta)[i], accumulating the log absolute
 * determinant of the Jacobian of T^-1 into `log_jac`.  Instantiated for
 * S = double (plain evaluation) and S = Var (exact partials on the tape).
 */
template <class S>
void decode_block(const ConstraintSpec& c, std::span<const S> zeta,
                  std::span<S> theta, S& log_jac,
                  TransformCounters* counters) {
  switch (c.kind) {
    case ConstraintKind::unconstrained:
      for (std::size_t i = 0; i < c.size; ++i) theta[i] = zeta[i];
      return;
    case ConstraintKind::lower_bounded:
      if (c.positive == PositiveTransform::log) {
        for (std::size_t i = 0; i < c.size; ++i) {
          S z = guarded_range(zeta[i], exp_floor(c.lb), kExpClamp, counters);
          theta[i] = c.lb + exp(z);
          log_jac = log_jac + z;
        }
      } else {  // softplus
        for (std::size_t i = 0; i < c.size; ++i) {
          S z = guarded_range(zeta[i], exp_floor(c.lb), kExpClamp, counters);
          theta[i] = c.lb + log1p_exp(z);
          log_jac = log_jac + log_logistic(z);
        }
      }
      return;
    case ConstraintKind::upper_bounded:
      for (std::size_t i = 0; i < c.size; ++i) {
        S z = guarded_range(zeta[i], exp_floor(c.ub), kExpClamp, counters);
        theta[i] = c.ub - exp(z);
        log_jac = log_jac + z;
      }
      return;
    case ConstraintKind::interval: {
      const double width = c.ub - c.lb;
      for (std::size_t i = 0; i < c.size; ++i) {
        S z = guarded(zeta[i], kLogisticClamp, counters);
        theta[i] = c.lb + width * logistic(z);
        log_jac =
            log_jac + (std::log(width) + log_logistic(z) + log_logistic(-z));
      }
      return;
    }
    case ConstraintKind::ordered:
    case ConstraintKind::positive_ordered: {
      std::size_t k = 0;
      if (c.kind == ConstraintKind::positive_ordered) {
        S z = guarded(zeta[0], kExpClamp, counters);
        theta[0] = exp(z);
        log_jac = log_jac + z;
      } else {
        theta[0] = zeta[0];
      }
      for (k = 1; k < c.size; ++k) {
        S z = guarded(zeta[k], kExpClamp, counters);
        theta[k] = theta[k - 1] + exp(z);
        log_jac = log_jac + z;
      }
      return;
    }
    case ConstraintKind::simplex: {
      // Stick breaking with the log(K - k) offset, so zeta = 0 decodes to the
      // uniform simplex.  Remaining stick lengths stay strictly positive
      // because the logistic argument is clamped.
      const std::size_t K = c.size;
      S stick{};  // set on first use
      for (std::size_t k = 0; k + 1 < K; ++k) {
        S adj = guarded(zeta[k] - std::log(static_cast<double>(K - 1 - k)),
                        kLogisticClamp, counters);
        S z = logistic(adj);
        if (k == 0) {
          theta[0] = z;
          stick = 1.0 - theta[0];
        } else {
          theta[k] = stick * z;
          log_jac = log_jac + log(stick);
          stick = stick - theta[k];
        }
        log_jac = log_jac + log_logistic(adj) + log_logistic(-adj);
      }
      theta[K - 1] = stick;
      return;
    }
  }
}

// Var needs an explicit zero on its tape; double just uses 0.0.
inline double zero_like(std::span<const double>) { return 0.0; }
inline Var zero_like(std::span<const Var> zeta) {
  return zeta[0].tape().constant(0.0);
}

}  // namespace detail

/**
 * Ordered list of per-block constraints with precomputed offsets; maps whole
 * parameter vectors between the constrained space and R^n.
 */
class TransformSet {
 public:
  TransformSet() = default;
  explicit TransformSet(std::vector<ConstraintSpec> specs);

  std::size_t constrained_dim() const { return c_dim_; }
  std::size_t unconstrained_dim() const { return u_dim_; }
  std::span<const ConstraintSpec> specs() const { return specs_; }
  std::size_t constrained_offset(std::size_t block) const {
    return c_off_[block];
  }
  std::size_t unconstrained_offset(std::size_t block) const {
    return u_off_[block];
  }

  /** T: constrained -> unconstrained.  Validates strict feasibility and
   *  reports the offending coordinate on failure. */
  Eigen::VectorXd encode(const Eigen::VectorXd& theta) const;

  /** T^-1 with its log |det Jacobian|; total over all blocks. */
  TransformedPoint decode(const Eigen::VectorXd& zeta,
                          TransformCounters* counters = nullptr) const;

  /** T^-1 built from tape primitives, so reverse sweeps see the exact
   *  analytic partials of both theta and the log Jacobian. */
  struct DecodedVars {
    std::vector<Var> theta;
    Var log_jac;
  };
  DecodedVars decode(std::span<const Var> zeta,
                     TransformCounters* counters = nullptr) const;

  /** Throws constraint_error (with coordinate) unless theta is strictly
   *  feasible for every block. */
  void check_feasible(const Eigen::VectorXd& theta) const;

 private:
  template <class S>
  void decode_generic(std::span<const S> zeta, std::span<S> theta, S& log_jac,
                      TransformCounters* counters) const {
    for (std::size_t b = 0; b < specs_.size(); ++b) {
      const ConstraintSpec& c = specs_[b];
      detail::decode_block<S>(c, zeta.subspan(u_off_[b], c.unconstrained_dim()),
                              theta.subspan(c_off_[b], c.constrained_dim()),
                              log_jac, counters);
    }
  }

  std::vector<ConstraintSpec> specs_;
  std::vector<std::size_t> c_off_, u_off_;
  std::size_t c_dim_ = 0, u_dim_ = 0;
};

/** Single-block convenience wrappers. */
Eigen::VectorXd forward(const ConstraintSpec& spec,
                        const Eigen::VectorXd& theta);
TransformedPoint inverse(const ConstraintSpec& spec,
                         const Eigen::VectorXd& zeta,
                         TransformCounters* counters = nullptr);

/**
 * Reference fixture: log of the transformed joint Poisson(x | theta) *
 * Weibull(theta; 1.5, 1) density after theta = exp(zeta), Jacobian included.
 */
double weibull_poisson_transformed_density(long x, double zeta);

}  // namespace advi
