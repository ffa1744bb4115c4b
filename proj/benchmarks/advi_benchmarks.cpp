#include <benchmark/benchmark.h>

#include "advi/models.hpp"
#include "advi/optimizer.hpp"
#include "advi/simulate.hpp"
#include "advi/variational.hpp"

namespace {

advi::Dataset logistic_data(std::size_t n) {
  advi::Rng rng(1234);
  return advi::simulate_logistic_regression(n, rng);
}

void GradientMeanField(benchmark::State& state) {
  const advi::Model& model = advi::logistic_regression_model();
  const advi::Dataset data = logistic_data(state.range(0));
  const advi::TransformSet transforms =
      advi::transform_set(model, data, advi::PositiveTransform::log);
  advi::MeanFieldGaussian q(transforms.unconstrained_dim());
  advi::Rng rng(42);
  advi::EstimatorOptions options;
  advi::EstimatorCounters counters;
  for (auto _ : state) {
    const advi::GradientEstimate est = advi::advi_gradient(
        model, data, transforms, q, {}, 1.0, rng, options, &counters);
    benchmark::DoNotOptimize(est.grad.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(GradientMeanField)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void GradientFullRank(benchmark::State& state) {
  const advi::Model& model = advi::logistic_regression_model();
  const advi::Dataset data = logistic_data(1024);
  const advi::TransformSet transforms =
      advi::transform_set(model, data, advi::PositiveTransform::log);
  advi::FullRankGaussian q(transforms.unconstrained_dim());
  advi::Rng rng(42);
  advi::EstimatorOptions options;
  options.samples = state.range(0);
  advi::EstimatorCounters counters;
  for (auto _ : state) {
    const advi::GradientEstimate est = advi::advi_gradient(
        model, data, transforms, q, {}, 1.0, rng, options, &counters);
    benchmark::DoNotOptimize(est.grad.data());
  }
}
BENCHMARK(GradientFullRank)->Arg(1)->Arg(10);

void DecodeConstrained(benchmark::State& state) {
  const advi::Model& model = advi::gamma_poisson_nmf_model();
  advi::Rng rng(7);
  const advi::Dataset data =
      advi::simulate_gamma_poisson_nmf(64, 32, 10, rng);
  const advi::TransformSet transforms =
      advi::transform_set(model, data, advi::PositiveTransform::log);
  Eigen::VectorXd zeta =
      Eigen::VectorXd::Zero(transforms.unconstrained_dim());
  advi::TransformCounters counters;
  for (auto _ : state) {
    const advi::TransformedPoint point = transforms.decode(zeta, &counters);
    benchmark::DoNotOptimize(point.theta.data());
  }
}
BENCHMARK(DecodeConstrained);

void FitIterations(benchmark::State& state) {
  const advi::Model& model = advi::logistic_regression_model();
  const advi::Dataset data = logistic_data(256);
  advi::FitConfig config;
  config.eta_scale = 0.1;
  config.max_iters = 50;
  config.tol_rel = 0.0;
  config.seed = 99;
  for (auto _ : state) {
    const advi::FitResult result = advi::fit(model, data, config);
    benchmark::DoNotOptimize(result.iterations);
  }
}
BENCHMARK(FitIterations)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  ::benchmark::Initialize(&argc, argv);
  if (::benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  ::benchmark::RunSpecifiedBenchmarks();
  ::benchmark::Shutdown();
  return 0;
}
