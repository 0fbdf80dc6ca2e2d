#include "models.hpp"

#include <deflab/deflator.hpp>
#include <deflab/kunita_yoeurp.hpp>

#include <benchmark/benchmark.h>

using namespace deflab;

static void BM_ConstructDeflator(benchmark::State& state) {
  const auto m = bench::multiplicative_market(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const WealthProblem problem{m.tree, m.P, m.S};
  for (auto _ : state) benchmark::DoNotOptimize(construct_deflator(problem));
  state.counters["nodes"] = static_cast<double>(m.tree.size());
}
BENCHMARK(BM_ConstructDeflator)->Args({4, 2})->Args({8, 2})->Args({5, 3})->Unit(benchmark::kMillisecond);

static void BM_DominatingMeasure(benchmark::State& state) {
  const auto m = bench::multiplicative_market(static_cast<int>(state.range(0)), 2);
  const Deflator d = construct_deflator(WealthProblem{m.tree, m.P, m.S});
  const AdaptedProcess Z = normalize_deflator(m.tree, m.P, d.Z);
  for (auto _ : state) {
    const DominatingMeasure dm = build_dominating_measure(m.tree, m.P, Z);
    benchmark::DoNotOptimize(verify_ky(dm));
  }
}
BENCHMARK(BM_DominatingMeasure)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
