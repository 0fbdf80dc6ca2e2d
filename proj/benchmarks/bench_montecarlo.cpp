#include <deflab/montecarlo.hpp>

#include <benchmark/benchmark.h>

using namespace deflab::mc;

static void BM_Philox(benchmark::State& state) {
  Philox4x32 g(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(g.normal());
}
BENCHMARK(BM_Philox);

static void BM_Diffusion(benchmark::State& state) {
  DiffusionScenario sc;
  sc.paths = 10000;
  sc.steps = 128;
  const RunOptions opt{static_cast<unsigned>(state.range(0)), 3};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_deflated_wealth(sc, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sc.paths));
}
BENCHMARK(BM_Diffusion)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_Levy(benchmark::State& state) {
  LevyScenario sc;
  sc.paths = 10000;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_levy_counterexample(sc));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sc.paths));
}
BENCHMARK(BM_Levy)->Unit(benchmark::kMillisecond);
