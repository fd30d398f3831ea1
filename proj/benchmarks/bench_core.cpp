// Microbenchmarks for the Monte Carlo hot path: noise sampling, the two
// stepping schemes, trace powers and the exact-moment engine.
#include <benchmark/benchmark.h>

#include "slngbm/estimators.hpp"
#include "slngbm/integrators.hpp"
#include "slngbm/moments.hpp"
#include "slngbm/noise.hpp"

using namespace slngbm;

namespace {

void BM_NormalDraw(benchmark::State& state) {
  RngStream rng(1, 0);
  double acc = 0.0;
  for (auto _ : state) acc += rng.next_normal();
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_NormalDraw);

void BM_SampleIncrement(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const NoiseCoefficients coeffs = noise_coefficients(n);
  NoiseIncrement inc(n);
  RngStream rng(1, 0);
  for (auto _ : state) {
    sample_increment_into(coeffs, 1e-3, rng, inc);
    benchmark::DoNotOptimize(inc.d_sym.data());
  }
}
BENCHMARK(BM_SampleIncrement)->Arg(2)->Arg(3)->Arg(5);

void BM_Step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool exponential = state.range(1) != 0;
  TrajectoryConfig config;
  config.n = n;
  config.tau_end = 1e4;
  config.dt = 1e-3;
  config.scheme = exponential ? Scheme::exponential : Scheme::euler;
  PathSimulator sim(config);
  for (auto _ : state) {
    sim.step();
    benchmark::DoNotOptimize(sim.f());
  }
}
BENCHMARK(BM_Step)->Args({2, 0})->Args({3, 0})->Args({5, 0})->Args({2, 1})->Args({3, 1})->Args({5, 1});

void BM_TracePower(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(2, 0);
  std::vector<double> e(static_cast<std::size_t>(n) * n);
  for (double& v : e) v = rng.next_normal();
  const SquareMatrix g = gram(SquareMatrix(n, e));
  for (auto _ : state) benchmark::DoNotOptimize(trace_power(g, 4));
}
BENCHMARK(BM_TracePower)->Arg(3)->Arg(5);

void BM_ExactMoments(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const MomentTable table = exact_moments(3, p, 1.0);
    benchmark::DoNotOptimize(table.values.data());
  }
}
BENCHMARK(BM_ExactMoments)->Arg(2)->Arg(4)->Arg(6)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
