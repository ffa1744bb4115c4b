#include "advi/transforms.hpp"

#include <cmath>

#include "advi/densities.hpp"

namespace advi {

namespace {

[[noreturn]] void infeasible(const char* what, std::size_t coordinate,
                             double value) {
  throw constraint_error(std::string(what) + " (coordinate " +
                         std::to_string(coordinate) + ", value " +
                         std::to_string(value) + ")");
}

}  // namespace

ConstraintSpec ConstraintSpec::unconstrained(std::size_t n) {
  return {ConstraintKind::unconstrained, 0.0, 0.0, n, PositiveTransform::log};
}

ConstraintSpec ConstraintSpec::lower_bounded(double lb, std::size_t n,
                                             PositiveTransform positive) {
  return {ConstraintKind::lower_bounded, lb, 0.0, n, positive};
}

ConstraintSpec ConstraintSpec::upper_bounded(double ub, std::size_t n) {
  return {ConstraintKind::upper_bounded, 0.0, ub, n, PositiveTransform::log};
}

ConstraintSpec ConstraintSpec::interval(double lb, double ub, std::size_t n) {
  if (!(lb < ub)) throw std::invalid_argument("interval: lb must be < ub");
  return {ConstraintKind::interval, lb, ub, n, PositiveTransform::log};
}

ConstraintSpec ConstraintSpec::ordered(std::size_t n) {
  if (n < 1) throw std::invalid_argument("ordered: need size >= 1");
  return {ConstraintKind::ordered, 0.0, 0.0, n, PositiveTransform::log};
}

ConstraintSpec ConstraintSpec::positive_ordered(std::size_t n) {
  if (n < 1) throw std::invalid_argument("positive_ordered: need size >= 1");
  return {ConstraintKind::positive_ordered, 0.0, 0.0, n,
          PositiveTransform::log};
}

ConstraintSpec ConstraintSpec::simplex(std::size_t n) {
  if (n < 2) throw std::invalid_argument("simplex: need size >= 2");
  return {ConstraintKind::simplex, 0.0, 0.0, n, PositiveTransform::log};
}

TransformSet::TransformSet(std::vector<ConstraintSpec> specs)
    : specs_(std::move(specs)) {
  c_off_.reserve(specs_.size());
  u_off_.reserve(specs_.size());
  for (const ConstraintSpec& c : specs_) {
    c_off_.push_back(c_dim_);
    u_off_.push_back(u_dim_);
    c_dim_ += c.constrained_dim();
    u_dim_ += c.unconstrained_dim();
  }
}

void TransformSet::check_feasible(const Eigen::VectorXd& theta) const {
  for (std::size_t b = 0; b < specs_.size(); ++b) {
    const ConstraintSpec& c = specs_[b];
    const std::size_t off = c_off_[b];
    switch (c.kind) {
      case ConstraintKind::unconstrained:
        break;
      case ConstraintKind::lower_bounded:
        for (std::size_t i = 0; i < c.size; ++i)
          if (!(theta[off + i] > c.lb))
            infeasible("value at or below lower bound", off + i,
                       theta[off + i]);
        break;
      case ConstraintKind::upper_bounded:
        for (std::size_t i = 0; i < c.size; ++i)
          if (!(theta[off + i] < c.ub))
            infeasible("value at or above upper bound", off + i,
                       theta[off + i]);
        break;
      case ConstraintKind::interval:
        for (std::size_t i = 0; i < c.size; ++i)
          if (!(theta[off + i] > c.lb && theta[off + i] < c.ub))
            infeasible("value outside open interval", off + i, theta[off + i]);
        break;
      case ConstraintKind::positive_ordered:
        if (!(theta[off] > 0.0))
          infeasible("non-positive leading value", off, theta[off]);
        [[fallthrough]];
      case ConstraintKind::ordered:
        for (std::size_t i = 1; i < c.size; ++i)
          if (!(theta[off + i] > theta[off + i - 1]))
            infeasible("non-increasing ordered value", off + i,
                       theta[off + i]);
        break;
      case ConstraintKind::simplex: {
        double sum = 0.0;
        for (std::size_t i = 0; i < c.size; ++i) {
          if (!(theta[off + i] > 0.0 && theta[off + i] < 1.0))
            infeasible("simplex value outside (0,1)", off + i, theta[off + i]);
          sum += theta[off + i];
        }
        if (std::fabs(sum - 1.0) > 1e-8)
          infeasible("simplex does not sum to 1", off, sum);
        break;
      }
    }
  }
}

Eigen::VectorXd TransformSet::encode(const Eigen::VectorXd& theta) const {
  check_feasible(theta);
  Eigen::VectorXd zeta(u_dim_);
  for (std::size_t b = 0; b < specs_.size(); ++b) {
    const ConstraintSpec& c = specs_[b];
    const std::size_t co = c_off_[b];
    const std::size_t uo = u_off_[b];
    switch (c.kind) {
      case ConstraintKind::unconstrained:
        for (std::size_t i = 0; i < c.size; ++i) zeta[uo + i] = theta[co + i];
        break;
      case ConstraintKind::lower_bounded:
        if (c.positive == PositiveTransform::log) {
          for (std::size_t i = 0; i < c.size; ++i)
            zeta[uo + i] = std::log(theta[co + i] - c.lb);
        } else {
          for (std::size_t i = 0; i < c.size; ++i)
            zeta[uo + i] = std::log(std::expm1(theta[co + i] - c.lb));
        }
        break;
      case ConstraintKind::upper_bounded:
        for (std::size_t i = 0; i < c.size; ++i)
          zeta[uo + i] = std::log(c.ub - theta[co + i]);
        break;
      case ConstraintKind::interval:
        for (std::size_t i = 0; i < c.size; ++i) {
          const double z = (theta[co + i] - c.lb) / (c.ub - c.lb);
          zeta[uo + i] = std::log(z) - std::log1p(-z);
        }
        break;
      case ConstraintKind::ordered:
        zeta[uo] = theta[co];
        for (std::size_t i = 1; i < c.size; ++i)
          zeta[uo + i] = std::log(theta[co + i] - theta[co + i - 1]);
        break;
      case ConstraintKind::positive_ordered:
        zeta[uo] = std::log(theta[co]);
        for (std::size_t i = 1; i < c.size; ++i)
          zeta[uo + i] = std::log(theta[co + i] - theta[co + i - 1]);
        break;
      case ConstraintKind::simplex: {
        double remaining = 1.0;
        for (std::size_t k = 0; k + 1 < c.size; ++k) {
          const double z = theta[co + k] / remaining;
          zeta[uo + k] = std::log(z) - std::log1p(-z) +
                         std::log(static_cast<double>(c.size - 1 - k));
          remaining -= theta[co + k];
        }
        break;
      }
    }
  }
  return zeta;
}

TransformedPoint TransformSet::decode(const Eigen::VectorXd& zeta,
                                      TransformCounters* counters) const {
  TransformedPoint out;
  out.theta.resize(c_dim_);
  double log_jac = 0.0;
  std::span<const double> zs(zeta.data(), zeta.size());
  std::span<double> ts(out.theta.data(), out.theta.size());
  decode_generic<double>(zs, ts, log_jac, counters);
  out.log_abs_det_jacobian = log_jac;
  return out;
}

TransformSet::DecodedVars TransformSet::decode(
    std::span<const Var> zeta, TransformCounters* counters) const {
  DecodedVars out;
  out.theta.resize(c_dim_);
  out.log_jac = detail::zero_like(zeta);
  decode_generic<Var>(zeta, std::span<Var>(out.theta), out.log_jac, counters);
  return out;
}

Eigen::VectorXd forward(const ConstraintSpec& spec,
                        const Eigen::VectorXd& theta) {
  return TransformSet({spec}).encode(theta);
}

TransformedPoint inverse(const ConstraintSpec& spec,
                         const Eigen::VectorXd& zeta,
                         TransformCounters* counters) {
  return TransformSet({spec}).decode(zeta, counters);
}

double weibull_poisson_transformed_density(long x, double zeta) {
  const double theta = std::exp(zeta);
  return poisson_log_lpmf(x, zeta) + weibull_lpdf(theta, 1.5, 1.0) + zeta;
}

}  // namespace advi
