#include "models.hpp"

#include <deflab/arbitrage.hpp>
#include <deflab/lp.hpp>

#include <benchmark/benchmark.h>

using namespace deflab;

static void BM_CheckNA1(benchmark::State& state) {
  const auto m = bench::multiplicative_market(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const WealthProblem problem{m.tree, m.P, m.S};
  for (auto _ : state) benchmark::DoNotOptimize(check_na1(problem));
  state.counters["nodes"] = static_cast<double>(m.tree.size());
}
BENCHMARK(BM_CheckNA1)->Args({2, 2})->Args({4, 2})->Args({6, 2})->Args({3, 3})->Args({4, 3})->Unit(benchmark::kMillisecond);

static void BM_CheckBothDantzig(benchmark::State& state) {
  const auto m = bench::multiplicative_market(static_cast<int>(state.range(0)), 2);
  const WealthProblem problem{m.tree, m.P, m.S};
  for (auto _ : state) benchmark::DoNotOptimize(check_both(problem, lp::PivotRule::Dantzig));
}
BENCHMARK(BM_CheckBothDantzig)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
