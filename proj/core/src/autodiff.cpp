#include "advi/autodiff.hpp"

#include <array>
#include <cmath>

#include "advi/math.hpp"

namespace advi {

const char* op_name(Op op) {
  switch (op) {
    case Op::input: return "input";
    case Op::constant: return "constant";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::neg: return "neg";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::log1p: return "log1p";
    case Op::sqrt: return "sqrt";
    case Op::tanh: return "tanh";
    case Op::pow: return "pow";
    case Op::logistic: return "logistic";
    case Op::lgamma: return "lgamma";
    case Op::log_sum_exp: return "log_sum_exp";
    case Op::clamp: return "clamp";
  }
  return "?";
}

double Var::value() const { return tape_->value(*this); }

Tape& Var::tape() const { return *tape_; }

void Tape::check_finite(Op op, double value, double arg) const {
  if (!std::isfinite(value)) {
    throw tape_error(std::string("non-finite value in ") + op_name(op) +
                     " (node " + std::to_string(nodes_.size()) +
                     ", argument value " + std::to_string(arg) + ")");
  }
}

Var Tape::push0(Op op, double value) {
  check_finite(op, value, value);
  nodes_.push_back({op, 0, static_cast<std::uint32_t>(args_.size())});
  values_.push_back(value);
  ++work_;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::push1(Op op, double value, const Var& a, double da) {
  check_finite(op, value, values_[a.index_]);
  nodes_.push_back({op, 1, static_cast<std::uint32_t>(args_.size())});
  values_.push_back(value);
  args_.push_back(a.index_);
  partials_.push_back(da);
  ++work_;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::push2(Op op, double value, const Var& a, double da, const Var& b,
                double db) {
  check_finite(op, value, values_[a.index_]);
  nodes_.push_back({op, 2, static_cast<std::uint32_t>(args_.size())});
  values_.push_back(value);
  args_.push_back(a.index_);
  args_.push_back(b.index_);
  partials_.push_back(da);
  partials_.push_back(db);
  ++work_;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::pushn(Op op, double value, std::span<const Var> args,
                std::span<const double> partials) {
  check_finite(op, value, value);
  nodes_.push_back({op, static_cast<std::uint32_t>(args.size()),
                    static_cast<std::uint32_t>(args_.size())});
  values_.push_back(value);
  for (const Var& a : args) args_.push_back(a.index_);
  for (double p : partials) partials_.push_back(p);
  ++work_;
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::input(double value) { return push0(Op::input, value); }

Var Tape::constant(double value) { return push0(Op::constant, value); }

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  args_.clear();
  partials_.clear();
}

void Tape::gradient(const Var& output, std::span<const Var> inputs,
                    std::span<double> out) {
  if (output.tape_ != this) throw tape_error("gradient: output not on tape");
  adjoint_.assign(nodes_.size(), 0.0);
  adjoint_[output.index_] = 1.0;
  for (std::uint32_t i = output.index_;; --i) {
    const double a = adjoint_[i];
    if (a != 0.0) {
      const Node& n = nodes_[i];
      for (std::uint32_t j = 0; j < n.n_args; ++j) {
        adjoint_[args_[n.arg_offset + j]] += a * partials_[n.arg_offset + j];
      }
    }
    if (i == 0) break;
  }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k].tape_ != this) throw tape_error("gradient: input not on tape");
    out[k] = adjoint_[inputs[k].index_];
  }
}

std::vector<double> Tape::gradient(const Var& output,
                                   std::span<const Var> inputs) {
  std::vector<double> out(inputs.size());
  gradient(output, inputs, out);
  return out;
}

namespace {

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw tape_error("operation on default-constructed Var");
  return a.tape();
}

}  // namespace

Var operator+(const Var& a, const Var& b) {
  return tape_of(a).push2(Op::add, a.value() + b.value(), a, 1.0, b, 1.0);
}

Var operator+(const Var& a, double b) {
  return tape_of(a).push1(Op::add, a.value() + b, a, 1.0);
}

Var operator-(const Var& a, const Var& b) {
  return tape_of(a).push2(Op::sub, a.value() - b.value(), a, 1.0, b, -1.0);
}

Var operator-(const Var& a, double b) {
  return tape_of(a).push1(Op::sub, a.value() - b, a, 1.0);
}

Var operator-(double a, const Var& b) {
  return tape_of(b).push1(Op::sub, a - b.value(), b, -1.0);
}

Var operator-(const Var& a) {
  return tape_of(a).push1(Op::neg, -a.value(), a, -1.0);
}

Var operator*(const Var& a, const Var& b) {
  return tape_of(a).push2(Op::mul, a.value() * b.value(), a, b.value(), b,
                          a.value());
}

Var operator*(const Var& a, double b) {
  return tape_of(a).push1(Op::mul, a.value() * b, a, b);
}

Var operator/(const Var& a, const Var& b) {
  const double bv = b.value();
  return tape_of(a).push2(Op::div, a.value() / bv, a, 1.0 / bv, b,
                          -a.value() / (bv * bv));
}

Var operator/(const Var& a, double b) {
  return tape_of(a).push1(Op::div, a.value() / b, a, 1.0 / b);
}

Var operator/(double a, const Var& b) {
  const double bv = b.value();
  return tape_of(b).push1(Op::div, a / bv, b, -a / (bv * bv));
}

Var exp(const Var& x) {
  const double v = std::exp(x.value());
  return tape_of(x).push1(Op::exp, v, x, v);
}

Var log(const Var& x) {
  const double xv = x.value();
  if (!(xv > 0.0)) {
    throw tape_error("log: non-positive argument (node " +
                     std::to_string(x.index()) + ", value " +
                     std::to_string(xv) + ")");
  }
  return tape_of(x).push1(Op::log, std::log(xv), x, 1.0 / xv);
}

Var log1p(const Var& x) {
  const double xv = x.value();
  if (!(xv > -1.0)) {
    throw tape_error("log1p: argument <= -1 (node " +
                     std::to_string(x.index()) + ", value " +
                     std::to_string(xv) + ")");
  }
  return tape_of(x).push1(Op::log1p, std::log1p(xv), x, 1.0 / (1.0 + xv));
}

Var sqrt(const Var& x) {
  const double xv = x.value();
  if (!(xv > 0.0)) {
    throw tape_error("sqrt: non-positive argument (node " +
                     std::to_string(x.index()) + ", value " +
                     std::to_string(xv) + ")");
  }
  const double v = std::sqrt(xv);
  return tape_of(x).push1(Op::sqrt, v, x, 0.5 / v);
}

Var tanh(const Var& x) {
  const double v = std::tanh(x.value());
  return tape_of(x).push1(Op::tanh, v, x, 1.0 - v * v);
}

Var pow(const Var& x, double y) {
  const double xv = x.value();
  if (!(xv > 0.0)) {
    throw tape_error("pow: non-positive base (node " +
                     std::to_string(x.index()) + ", value " +
                     std::to_string(xv) + ")");
  }
  const double v = std::pow(xv, y);
  return tape_of(x).push1(Op::pow, v, x, y * v / xv);
}

Var pow(const Var& x, const Var& y) {
  const double xv = x.value();
  if (!(xv > 0.0)) {
    throw tape_error("pow: non-positive base (node " +
                     std::to_string(x.index()) + ", value " +
                     std::to_string(xv) + ")");
  }
  const double v = std::pow(xv, y.value());
  return tape_of(x).push2(Op::pow, v, x, y.value() * v / xv, y,
                          v * std::log(xv));
}

Var logistic(const Var& x) {
  const double v = math::logistic(x.value());
  return tape_of(x).push1(Op::logistic, v, x, v * (1.0 - v));
}

Var lgamma(const Var& x) {
  const double xv = x.value();
  if (!(xv > 0.0)) {
    throw tape_error("lgamma: non-positive argument (node " +
                     std::to_string(x.index()) + ", value " +
                     std::to_string(xv) + ")");
  }
  return tape_of(x).push1(Op::lgamma, math::lgamma(xv), x, math::digamma(xv));
}

Var log_sum_exp(std::span<const Var> xs) {
  if (xs.empty()) throw tape_error("log_sum_exp: empty argument list");
  Tape& tape = tape_of(xs[0]);
  double m = xs[0].value();
  for (const Var& x : xs)
    if (x.value() > m) m = x.value();
  double sum = 0.0;
  std::array<double, 64> small;
  std::vector<double> large;
  std::span<double> partials;
  if (xs.size() <= small.size()) {
    partials = std::span<double>(small.data(), xs.size());
  } else {
    large.resize(xs.size());
    partials = large;
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    partials[i] = std::exp(xs[i].value() - m);
    sum += partials[i];
  }
  for (std::size_t i = 0; i < xs.size(); ++i) partials[i] /= sum;  // softmax
  return tape.pushn(Op::log_sum_exp, m + std::log(sum), xs, partials);
}

Var clamp(const Var& x, double lo, double hi) {
  const double xv = x.value();
  const double v = xv < lo ? lo : (xv > hi ? hi : xv);
  const double d = (xv < lo || xv > hi) ? 0.0 : 1.0;
  return tape_of(x).push1(Op::clamp, v, x, d);
}

Var log1p_exp(const Var& x) {
  // Same function on both branches; the split only avoids exp overflow.
  if (x.value() > 0.0) return x + log1p(exp(-x));
  return log1p(exp(x));
}

}  // namespace advi
