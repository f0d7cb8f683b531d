#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

#include "exhawkes/gp/basis.hpp"
#include "exhawkes/gp/trigger.hpp"
#include "exhawkes/inference/hybrid.hpp"
#include "exhawkes/marks/distributions.hpp"
#include "exhawkes/marks/fit.hpp"
#include "exhawkes/predict/predict.hpp"
#include "exhawkes/sim/simulate.hpp"

using namespace exhawkes;

namespace {

std::shared_ptr<const gp::EigenBasis> rq_basis(int grid, std::size_t rank) {
  return std::make_shared<const gp::EigenBasis>(
      gp::decompose(gp::CovarianceKernel::separable_rq(0.3, 1.0, 1.0), gp::InducingGrid::uniform(grid), rank));
}

sim::SimResult simulated(std::uint64_t seed) {
  sim::SimConfig cfg;
  cfg.mu_constant = 50.0;
  cfg.basis = rq_basis(8, 50);
  cfg.mode = sim::OffspringMode::chain;
  cfg.seed = seed;
  Rng rng(seed);
  cfg.trigger.omega = gp::sample_omega_prior(*cfg.basis, 1.0, 0.1, rng);
  return sim::simulate_hawkes(cfg);
}

}  // namespace

static void BM_GzdTailSum(benchmark::State& state) {
  const double xi = 0.5 + 0.1 * double(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(marks::gzd_tail_sum(3, xi, 3.4));
}
BENCHMARK(BM_GzdTailSum)->DenseRange(0, 5);

static void BM_MixtureSample(benchmark::State& state) {
  marks::MarkMixture mix;
  mix.pi_m = 0.415;
  mix.body.alpha = 0.131;
  mix.body.beta = 1.9;
  mix.tail.xi = 0.475;
  mix.tail.sigma = 3.43;
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(marks::sample_mark(mix, rng));
}
BENCHMARK(BM_MixtureSample);

static void BM_MleFit(benchmark::State& state) {
  marks::MarkMixture mix;
  mix.pi_m = 0.415;
  mix.body.alpha = 0.131;
  mix.body.beta = 1.9;
  mix.tail.xi = 0.475;
  mix.tail.sigma = 3.43;
  Rng rng(2);
  std::vector<long> values(static_cast<std::size_t>(state.range(0)));
  for (auto& v : values) v = marks::sample_mark(mix, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(marks::mle_fit(values, marks::BodyFamily::zip, marks::TailFamily::gzd, 2));
}
BENCHMARK(BM_MleFit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_Decompose(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rq_basis(grid, 50));
}
BENCHMARK(BM_Decompose)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_DecomposeLanczos(benchmark::State& state) {
  const auto k = gp::CovarianceKernel::squared_exponential(0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(gp::decompose(k, gp::InducingGrid::uniform(8), static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_DecomposeLanczos)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_FeatureMap(benchmark::State& state) {
  const auto basis = rq_basis(8, static_cast<std::size_t>(state.range(0)));
  const gp::TriggerInput x{0.1, 0.2, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(gp::feature_map(x, *basis));
}
BENCHMARK(BM_FeatureMap)->Arg(20)->Arg(50)->Arg(100);

static void BM_ParticleIntegral(benchmark::State& state) {
  const auto basis = rq_basis(8, 50);
  const gp::TriggerSource root{0.2, {0.5, 0.5}, 0.3};
  Rng rng(3);
  for (auto _ : state)
    benchmark::DoNotOptimize(gp::integral_outer(*basis, root, static_cast<std::size_t>(state.range(0)), rng));
}
BENCHMARK(BM_ParticleIntegral)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

static void BM_Simulate(benchmark::State& state) {
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulated(seed++));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

static void BM_HybridIteration(benchmark::State& state) {
  const auto data = simulated(4);
  inference::McmcConfig cfg;
  cfg.n_samples = 1000000;
  cfg.burn_in = 10;
  cfg.particles = static_cast<std::size_t>(state.range(0));
  cfg.momentum_from_prior = true;
  inference::HybridSampler sampler(data.pattern, baseline::BaselineDesign::intercept_only(), inference::TriggerSpec{},
                                   cfg);
  sampler.set_state(sampler.initial_state());
  for (auto _ : state) sampler.step();
  state.counters["events"] = double(data.pattern.size());
}
BENCHMARK(BM_HybridIteration)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_YearlyGrid(benchmark::State& state) {
  const auto data = simulated(5);
  ObservationDomain original;
  original.x = {60.5, 75.0};
  original.y = {29.4, 38.5};
  original.t = {2013.0, 2019.0};
  const UnitScaler scaler(original);
  const auto design = baseline::BaselineDesign::intercept_only();
  predict::IntensityModel model;
  model.theta_mu = Eigen::VectorXd::Constant(1, std::log(50.0));
  model.basis = rq_basis(8, 50);
  Rng rng(6);
  model.trigger.omega = gp::sample_omega_prior(*model.basis, 1.0, 0.1, rng);
  const std::vector<predict::IntensityModel> models{model};
  const predict::PredictContext ctx{&data.pattern, &scaler, &design};
  predict::GridSpec spec;
  spec.dx = 0.5;
  spec.dy = 0.5;
  spec.n_time_samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(predict::yearly_grid(models, ctx, 2016, spec));
}
BENCHMARK(BM_YearlyGrid)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
