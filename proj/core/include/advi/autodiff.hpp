#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "advi/math.hpp"

namespace advi {

class Tape;

/** Raised on domain violations and non-finite intermediates; the message
 *  identifies the offending node and operation. */
class tape_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op : std::uint8_t {
  input,
  constant,
  add,
  sub,
  mul,
  div,
  neg,
  exp,
  log,
  log1p,
  sqrt,
  tanh,
  pow,
  logistic,
  lgamma,
  log_sum_exp,
  clamp,
};

const char* op_name(Op op);

/**
 * Handle to one node of a Tape.  Cheap to copy.  Arithmetic on Vars appends
 * nodes to the owning tape; forward values are computed eagerly, so a Var's
 * value is available as soon as it is built.
 */
class Var {
 public:
  Var() = default;

  double value() const;
  Tape& tape() const;
  std::uint32_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

/**
 * Append-only record of a forward computation: per node, the operation, its
 * operand indices and the local partial derivatives.  A tape is built afresh
 * for every evaluation and reused via clear(), which keeps capacity.
 *
 * Every pushed value is checked finite; a violation raises tape_error naming
 * the node, so a Monte Carlo caller can discard the sample and redraw.
 */
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /** Differentiation root (leaf node). */
  Var input(double value);
  /** Leaf node with zero adjoint contribution. */
  Var constant(double value);

  std::size_t size() const { return nodes_.size(); }
  double value(const Var& v) const { return values_[v.index_]; }

  /** Forget all nodes but keep allocated capacity. */
  void clear();

  /**
   * Reverse accumulation: seeds a unit adjoint at `output`, sweeps the tape
   * backwards once, and returns d(output)/d(input) for every requested input.
   */
  std::vector<double> gradient(const Var& output, std::span<const Var> inputs);
  void gradient(const Var& output, std::span<const Var> inputs,
                std::span<double> out);

  /** Cumulative count of nodes pushed over the tape's lifetime (survives
   *  clear); used as a deterministic work/progress measure. */
  std::uint64_t work() const { return work_; }

 private:
  struct Node {
    Op op;
    std::uint32_t n_args;
    std::uint32_t arg_offset;
  };

  Var push0(Op op, double value);
  Var push1(Op op, double value, const Var& a, double da);
  Var push2(Op op, double value, const Var& a, double da, const Var& b,
            double db);
  Var pushn(Op op, double value, std::span<const Var> args,
            std::span<const double> partials);
  void check_finite(Op op, double value, double arg) const;

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<std::uint32_t> args_;
  std::vector<double> partials_;
  std::vector<double> adjoint_;  // reverse-sweep scratch
  std::uint64_t work_ = 0;

  friend Var operator+(const Var&, const Var&);
  friend Var operator+(const Var&, double);
  friend Var operator-(const Var&, const Var&);
  friend Var operator-(const Var&, double);
  friend Var operator-(double, const Var&);
  friend Var operator-(const Var&);
  friend Var operator*(const Var&, const Var&);
  friend Var operator*(const Var&, double);
  friend Var operator/(const Var&, const Var&);
  friend Var operator/(const Var&, double);
  friend Var operator/(double, const Var&);
  friend Var exp(const Var&);
  friend Var log(const Var&);
  friend Var log1p(const Var&);
  friend Var sqrt(const Var&);
  friend Var tanh(const Var&);
  friend Var pow(const Var&, double);
  friend Var pow(const Var&, const Var&);
  friend Var logistic(const Var&);
  friend Var lgamma(const Var&);
  friend Var log_sum_exp(std::span<const Var>);
  friend Var clamp(const Var&, double, double);
};

Var operator+(const Var& a, const Var& b);
Var operator+(const Var& a, double b);
inline Var operator+(double a, const Var& b) { return b + a; }
Var operator-(const Var& a, const Var& b);
Var operator-(const Var& a, double b);
Var operator-(double a, const Var& b);
Var operator-(const Var& a);
Var operator*(const Var& a, const Var& b);
Var operator*(const Var& a, double b);
inline Var operator*(double a, const Var& b) { return b * a; }
Var operator/(const Var& a, const Var& b);
Var operator/(const Var& a, double b);
Var operator/(double a, const Var& b);

Var exp(const Var& x);
Var log(const Var& x);
Var log1p(const Var& x);
Var sqrt(const Var& x);
Var tanh(const Var& x);
Var pow(const Var& x, double y);
Var pow(const Var& x, const Var& y);
Var logistic(const Var& x);
Var lgamma(const Var& x);
Var log_sum_exp(std::span<const Var> xs);
Var clamp(const Var& x, double lo, double hi);

/** Stable log(1 + exp(x)) composed from primitives (value-directed branch). */
Var log1p_exp(const Var& x);
inline Var log_logistic(const Var& x) { return -log1p_exp(-x); }
inline Var square(const Var& x) { return x * x; }

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.value(); }

// Vocabulary for code that is generic over double and Var: the std overloads
// (or our scalar equivalents) are lifted to namespace scope here, so an
// unqualified call inside an advi:: template resolves for either scalar.
using std::exp;
using std::log;
using std::log1p;
using std::pow;
using std::sqrt;
using std::tanh;
inline double logistic(double x) { return math::logistic(x); }
inline double log1p_exp(double x) { return math::log1p_exp(x); }
inline double log_logistic(double x) { return math::log_logistic(x); }
inline double lgamma(double x) { return math::lgamma(x); }
inline double clamp(double x, double lo, double hi) {
  return math::clamp(x, lo, hi);
}
inline double log_sum_exp(std::span<const double> x) {
  return math::log_sum_exp(x);
}
inline double square(double x) { return x * x; }

/** True if any argument type is Var; selects the promoted scalar type. */
template <class... Ts>
inline constexpr bool any_var_v = (std::is_same_v<std::decay_t<Ts>, Var> || ...);
template <class... Ts>
using promote_t = std::conditional_t<any_var_v<Ts...>, Var, double>;

}  // namespace advi
