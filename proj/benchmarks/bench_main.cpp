#include <benchmark/benchmark.h>

#include "bbmflow/dynamics.hpp"
#include "bbmflow/random_fields.hpp"
#include "bbmflow/transport.hpp"

using namespace bbmflow;

namespace {

Ensemble ensemble(int modes, std::uint64_t seed, std::size_t count) {
  return sample_gaussian(MeasureSpec::gaussian_l2(modes), seed, count);
}

void BM_Rhs(benchmark::State& state) {
  const int modes = int(state.range(0));
  const SpectralField u = sample_gaussian_one(MeasureSpec::gaussian_l2(modes), 1, 0);
  const EvolveParams params{1e-3, modes, false};
  for (auto _ : state) benchmark::DoNotOptimize(bbm_rhs(u, params));
}
BENCHMARK(BM_Rhs)->Arg(32)->Arg(64)->Arg(256);

void BM_EvolveUnitTime(benchmark::State& state) {
  const int modes = int(state.range(0));
  const SpectralField u = sample_gaussian_one(MeasureSpec::gaussian_l2(modes), 1, 0);
  const EvolveParams params{1e-3, modes, false};
  for (auto _ : state) benchmark::DoNotOptimize(evolve(u, 1.0, params));
  state.SetLabel("1000 RK4 steps");
}
BENCHMARK(BM_EvolveUnitTime)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CostMatrix(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const Ensemble a = ensemble(32, 1, n), b = ensemble(32, 2, n);
  for (auto _ : state) benchmark::DoNotOptimize(cost_matrix(a, b, SobolevIndex(0.3), 2.0));
}
BENCHMARK(BM_CostMatrix)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_ExactOt(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const CostMatrix c = cost_matrix(ensemble(32, 1, n), ensemble(32, 2, n), SobolevIndex(0.0), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(exact_ot(c));
}
BENCHMARK(BM_ExactOt)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Sinkhorn(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const CostMatrix c = cost_matrix(ensemble(32, 1, n), ensemble(32, 2, n), SobolevIndex(0.0), 2.0);
  const double eps = 0.01 * median_cost(c);
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_ot(c, eps, 1e-6));
}
BENCHMARK(BM_Sinkhorn)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
