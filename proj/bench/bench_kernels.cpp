#include <benchmark/benchmark.h>

#include "fdsr/experiments.hpp"
#include "fdsr/oracle.hpp"
#include "fdsr/rng.hpp"

using namespace fdsr;

namespace {

SweepSpec bench_sweep(std::size_t trials) {
  SweepSpec s = figure_preset("fig3")[0];
  s.trials = trials;
  return s;
}

// A scenario where C1 holds somewhere, so the scan does real work.
ChannelSet feasible_scenario() {
  for (std::uint64_t i = 0;; ++i) {
    Rng rng = trial_rng(1, i);
    ChannelSet ch = sample_channel_set(ChannelParams{}, rng);
    if (solve(ch, SystemParams{}, Strategy::ps_continuous()).feasible) return ch;
  }
}

void BM_SweepSerial(benchmark::State& state) {
  const SweepSpec s = bench_sweep(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(s));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 80);
}

void BM_SweepParallel(benchmark::State& state) {
  const SweepSpec s = bench_sweep(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_detailed(s));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 80);
}

void BM_GridSerial(benchmark::State& state) {
  const ChannelSet ch = feasible_scenario();
  oracle::GridSpec g;
  g.m_points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        oracle::grid_search_serial(ch, SystemParams{}, Strategy::ps_continuous(), g));
  }
}

void BM_GridParallel(benchmark::State& state) {
  const ChannelSet ch = feasible_scenario();
  oracle::GridSpec g;
  g.m_points = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle::grid_search(ch, SystemParams{}, Strategy::ps_continuous(), g));
  }
}

void BM_Solve(benchmark::State& state) {
  const ChannelSet ch = feasible_scenario();
  const Strategy s = state.range(0) == 0 ? Strategy::ps_continuous() : Strategy::ps_discrete(0.785398163397);
  for (auto _ : state) benchmark::DoNotOptimize(solve(ch, SystemParams{}, s));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Solve)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
