#include "advi/variational.hpp"

#include <cmath>

#include "advi/densities.hpp"
#include "advi/parallel.hpp"

namespace advi {

namespace {

constexpr double kDegenerateScale = 1e-12;

Eigen::VectorXd draw_standard_normal(std::size_t dim, Rng& rng) {
  Eigen::VectorXd eta(dim);
  for (std::size_t k = 0; k < dim; ++k) eta[k] = rng.normal();
  return eta;
}

}  // namespace

Eigen::VectorXd MeanFieldGaussian::sample(Rng& rng) const {
  return transport(draw_standard_normal(dim(), rng));
}

double MeanFieldGaussian::entropy() const {
  return 0.5 * dim() * (1.0 + math::log_two_pi()) + omega.sum();
}

double MeanFieldGaussian::log_density(const Eigen::VectorXd& zeta) const {
  const Eigen::ArrayXd z = (zeta - mu).array() * (-omega).array().exp();
  return -0.5 * dim() * math::log_two_pi() - omega.sum() -
         0.5 * z.square().sum();
}

Eigen::VectorXd MeanFieldGaussian::pack() const {
  Eigen::VectorXd packed(packed_dim());
  packed << mu, omega;
  return packed;
}

void MeanFieldGaussian::set_packed(const Eigen::VectorXd& packed) {
  const Eigen::Index k = packed.size() / 2;
  mu = packed.head(k);
  omega = packed.tail(k);
}

Eigen::VectorXd FullRankGaussian::sample(Rng& rng) const {
  return transport(draw_standard_normal(dim(), rng));
}

double FullRankGaussian::entropy() const {
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < L.rows(); ++k) {
    const double d = std::fabs(L(k, k));
    if (d < kDegenerateScale) {
      throw diverged_error("covariance factor is numerically singular");
    }
    log_det += std::log(d);
  }
  return 0.5 * dim() * (1.0 + math::log_two_pi()) + log_det;
}

double FullRankGaussian::log_density(const Eigen::VectorXd& zeta) const {
  double log_det = 0.0;
  for (Eigen::Index k = 0; k < L.rows(); ++k) {
    const double d = std::fabs(L(k, k));
    if (d < kDegenerateScale) {
      throw diverged_error("covariance factor is numerically singular");
    }
    log_det += std::log(d);
  }
  const Eigen::VectorXd y =
      L.triangularView<Eigen::Lower>().solve(zeta - mu);
  return -0.5 * dim() * math::log_two_pi() - log_det - 0.5 * y.squaredNorm();
}

Eigen::VectorXd FullRankGaussian::pack() const {
  Eigen::VectorXd packed(packed_dim());
  const Eigen::Index k = mu.size();
  packed.head(k) = mu;
  Eigen::Index at = k;
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c <= r; ++c) packed[at++] = L(r, c);
  return packed;
}

void FullRankGaussian::set_packed(const Eigen::VectorXd& packed) {
  // packed_dim = k + k (k + 1) / 2, solved for k.
  const Eigen::Index k =
      static_cast<Eigen::Index>((std::sqrt(9.0 + 8.0 * packed.size()) - 3.0) / 2.0 + 0.5);
  mu = packed.head(k);
  L = Eigen::MatrixXd::Zero(k, k);
  Eigen::Index at = k;
  for (Eigen::Index r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c <= r; ++c) L(r, c) = packed[at++];
}

std::size_t approximation_dim(const Approximation& q) {
  return std::visit([](const auto& g) { return g.dim(); }, q);
}

double approximation_entropy(const Approximation& q) {
  return std::visit([](const auto& g) { return g.entropy(); }, q);
}

Eigen::VectorXd approximation_mean(const Approximation& q) {
  return std::visit([](const auto& g) { return g.mu; }, q);
}

Eigen::VectorXd approximation_stddev(const Approximation& q) {
  if (const auto* mf = std::get_if<MeanFieldGaussian>(&q)) {
    return mf->omega.array().exp();
  }
  const auto& fr = std::get<FullRankGaussian>(q);
  return fr.covariance().diagonal().array().sqrt();
}

Eigen::VectorXd sample_zeta(const Approximation& q, Rng& rng) {
  return std::visit([&](const auto& g) { return g.sample(rng); }, q);
}

double log_density_constrained(const Approximation& q,
                               const TransformSet& transforms,
                               const Eigen::VectorXd& theta) {
  const Eigen::VectorXd zeta = transforms.encode(theta);
  const TransformedPoint back = transforms.decode(zeta);
  const double lq =
      std::visit([&](const auto& g) { return g.log_density(zeta); }, q);
  return lq - back.log_abs_det_jacobian;
}

GradientEstimate advi_gradient_at(const Model& model, const Dataset& data,
                                  const TransformSet& transforms,
                                  const Approximation& q,
                                  const Eigen::VectorXd& eta,
                                  std::span<const std::size_t> minibatch,
                                  double scale, EstimatorCounters* counters) {
  const std::size_t dim = approximation_dim(q);
  const Eigen::VectorXd zeta =
      std::visit([&](const auto& g) { return g.transport(eta); }, q);

  Tape tape;
  std::vector<Var> zeta_vars;
  zeta_vars.reserve(dim);
  for (std::size_t k = 0; k < dim; ++k) zeta_vars.push_back(tape.input(zeta[k]));

  TransformCounters transform_counters;
  TransformSet::DecodedVars decoded =
      transforms.decode(std::span<const Var>(zeta_vars), &transform_counters);
  const Var joint = model.log_joint(
      data, std::span<const Var>(decoded.theta), minibatch, scale);
  const Var root = joint + decoded.log_jac;

  std::vector<double> inner(dim);
  tape.gradient(root, std::span<const Var>(zeta_vars),
                std::span<double>(inner));

  if (counters != nullptr) {
    counters->clamp_events += transform_counters.clamp_events;
    counters->tape_nodes += tape.size();
  }

  GradientEstimate out;
  out.elbo = root.value();
  if (const auto* mf = std::get_if<MeanFieldGaussian>(&q)) {
    out.grad.resize(2 * dim);
    for (std::size_t k = 0; k < dim; ++k) {
      out.grad[k] = inner[k];
      out.grad[dim + k] = inner[k] * eta[k] * std::exp(mf->omega[k]);
    }
  } else {
    const auto& fr = std::get<FullRankGaussian>(q);
    out.grad.resize(fr.packed_dim());
    Eigen::Index at = dim;
    for (std::size_t r = 0; r < dim; ++r) {
      out.grad[r] = inner[r];
      for (std::size_t c = 0; c <= r; ++c) out.grad[at++] = inner[r] * eta[c];
    }
  }
  return out;
}

namespace {

/** Shared retry/parallel scaffolding: evaluates `one_sample` per index with
 *  its own stream, averaging the per-sample gradients in index order. */
template <class OneSample>
GradientEstimate average_samples(std::size_t dim_packed,
                                 const EstimatorOptions& options,
                                 Rng& rng, EstimatorCounters* counters,
                                 OneSample&& one_sample) {
  const std::size_t m = std::max<std::size_t>(1, options.samples);
  const std::uint64_t salt = rng.raw();

  Eigen::MatrixXd grads(dim_packed, m);
  Eigen::VectorXd values(m);
  std::vector<EstimatorCounters> tallies(m);

  const std::size_t attempts_allowed = std::max<std::size_t>(1, options.retry_limit);
  parallel_for(m, options.threads, [&](std::size_t s) {
    Rng stream(mix_seed(salt, s));
    GradientEstimate est;
    std::size_t attempt = 0;
    const auto discard_or_give_up = [&](const char* what) {
      if (attempt >= attempts_allowed) {
        throw diverged_error("gradient sample failed " +
                             std::to_string(attempt) +
                             " times in a row; last failure: " + what);
      }
      ++tallies[s].discarded_samples;
    };
    for (;;) {
      ++attempt;
      try {
        est = one_sample(stream, &tallies[s]);
        break;
      } catch (const tape_error& e) {
        discard_or_give_up(e.what());
      } catch (const out_of_support_error& e) {
        discard_or_give_up(e.what());
      } catch (const parameter_error& e) {
        // An extreme draw can underflow a derived density argument (for
        // example exp(h/2) rounding to zero); that is a failed sample, not
        // a caller error.  Persistent failures still exhaust the retry
        // budget and surface the message.
        discard_or_give_up(e.what());
      }
    }
    grads.col(s) = est.grad;
    values[s] = est.elbo;
  });

  if (counters != nullptr) {
    for (const EstimatorCounters& t : tallies) {
      counters->discarded_samples += t.discarded_samples;
      counters->clamp_events += t.clamp_events;
      counters->tape_nodes += t.tape_nodes;
    }
  }

  GradientEstimate out;
  out.grad = Eigen::VectorXd::Zero(dim_packed);
  double elbo = 0.0;
  for (std::size_t s = 0; s < m; ++s) {  // fixed order: thread-count invariant
    out.grad += grads.col(s);
    elbo += values[s];
  }
  out.grad /= static_cast<double>(m);
  out.elbo = elbo / static_cast<double>(m);
  return out;
}

}  // namespace

GradientEstimate advi_gradient(const Model& model, const Dataset& data,
                               const TransformSet& transforms,
                               const Approximation& q,
                               std::span<const std::size_t> minibatch,
                               double scale, Rng& rng,
                               const EstimatorOptions& options,
                               EstimatorCounters* counters) {
  const std::size_t dim = approximation_dim(q);
  const std::size_t dim_packed = std::visit(
      [](const auto& g) { return g.packed_dim(); }, q);
  const double entropy = approximation_entropy(q);

  GradientEstimate out = average_samples(
      dim_packed, options, rng, counters,
      [&](Rng& stream, EstimatorCounters* tally) {
        return advi_gradient_at(model, data, transforms, q,
                                draw_standard_normal(dim, stream), minibatch,
                                scale, tally);
      });

  // Entropy enters analytically: d/d omega_k = 1, d/d L_kk = 1 / L_kk.
  out.elbo += entropy;
  if (std::holds_alternative<MeanFieldGaussian>(q)) {
    out.grad.tail(dim).array() += 1.0;
  } else {
    const auto& fr = std::get<FullRankGaussian>(q);
    std::size_t at = dim;
    for (std::size_t r = 0; r < dim; ++r) {
      at += r;  // skip to the diagonal entry of row r
      out.grad[at] += 1.0 / fr.L(r, r);
      ++at;
    }
  }
  return out;
}

GradientEstimate bbvi_gradient(const Model& model, const Dataset& data,
                               const TransformSet& transforms,
                               const MeanFieldGaussian& q, Rng& rng,
                               const EstimatorOptions& options,
                               EstimatorCounters* counters) {
  const std::size_t dim = q.dim();
  return average_samples(
      2 * dim, options, rng, counters,
      [&](Rng& stream, EstimatorCounters*) {
        const Eigen::VectorXd eta = draw_standard_normal(dim, stream);
        const Eigen::VectorXd zeta = q.transport(eta);
        const TransformedPoint point = transforms.decode(zeta);
        const double joint = model.log_joint(
            data, std::span<const double>(point.theta.data(),
                                          point.theta.size()),
            {}, 1.0);
        const double value = joint + point.log_abs_det_jacobian;
        if (!std::isfinite(value)) {
          throw out_of_support_error("bbvi: non-finite log joint");
        }
        const double factor = value - q.log_density(zeta);

        GradientEstimate est;
        est.elbo = factor;
        est.grad.resize(2 * dim);
        for (std::size_t k = 0; k < dim; ++k) {
          const double centered = zeta[k] - q.mu[k];
          const double unit = centered * std::exp(-q.omega[k]);
          est.grad[k] = centered * std::exp(-2.0 * q.omega[k]) * factor;
          est.grad[dim + k] = (unit * unit - 1.0) * factor;
        }
        return est;
      });
}

}  // namespace advi
