#include <benchmark/benchmark.h>

#include "pfgb/scheme.hpp"
#include "pfgb/verify.hpp"

using namespace pfgb;

namespace {

ModelSpec bench_model() { return ModelSpec::make(PotentialSpec{}, MobilitySpec{}); }

GridSpec grid_for(const benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  return state.range(1) == 1 ? GridSpec::line(n, 0.5) : GridSpec::plane(n, n, 0.5);
}

void BM_Gradient(benchmark::State& state) {
  const GridSpec g = grid_for(state);
  const PhaseState s = random_state(g, bench_model(), 1);
  std::vector<double> gx(g.size()), gy(g.size());
  for (auto _ : state) {
    gradient_into(g, s.theta.values(), gx, gy);
    benchmark::DoNotOptimize(gx.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_Gradient)->Args({64, 1})->Args({32, 2})->Args({128, 2});

void BM_Divergence(benchmark::State& state) {
  const GridSpec g = grid_for(state);
  const PhaseState s = random_state(g, bench_model(), 1);
  std::vector<double> gx(g.size()), gy(g.size()), out(g.size());
  gradient_into(g, s.theta.values(), gx, gy);
  for (auto _ : state) {
    divergence_into(g, gx, gy, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_Divergence)->Args({64, 1})->Args({32, 2})->Args({128, 2});

void BM_VStep(benchmark::State& state) {
  const ModelSpec m = bench_model();
  const PhaseState s = random_state(grid_for(state), m, 2);
  VStepParams p;
  p.h = 0.5 * h_star(m);
  for (auto _ : state) benchmark::DoNotOptimize(v_step(s.w, s.eta, s.theta, m, 0.1, p));
}
BENCHMARK(BM_VStep)->Args({64, 1})->Args({32, 2})->Unit(benchmark::kMillisecond);

void BM_ThetaStep(benchmark::State& state) {
  const ModelSpec m = bench_model();
  const PhaseState s = random_state(grid_for(state), m, 3);
  ThetaStepParams p;
  p.h = 0.5 * h_star(m);
  for (auto _ : state) benchmark::DoNotOptimize(theta_step(s.theta, s.w, s.eta, m, 0.1, p));
}
BENCHMARK(BM_ThetaStep)->Args({64, 1})->Args({16, 2})->Unit(benchmark::kMillisecond);

void BM_SchemeStep(benchmark::State& state) {
  const ModelSpec m = bench_model();
  const PhaseState s = random_state(grid_for(state), m, 4);
  SchemeParams p;
  p.h = 0.5 * h_star(m);
  p.nu = 0.1;
  p.n_steps = 1;
  p.sync();
  for (auto _ : state) benchmark::DoNotOptimize(run(s, m, p));
}
BENCHMARK(BM_SchemeStep)->Args({64, 1})->Args({16, 2})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
