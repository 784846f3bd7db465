#include <benchmark/benchmark.h>

#include "ppqc/engine.hpp"
#include "ppqc/experiments.hpp"

using namespace ppqc;

namespace {

struct Setup {
  Digraph g;
  std::vector<SubstateSchedule> schedules;
};

Setup twenty_nodes(std::uint64_t seed) {
  Rng rng(seed);
  Setup s{generate_random_strongly_connected(20, 0.3, rng), {}};
  const std::size_t dmax = max_out_degree(s.g);
  for (std::int64_t y : kReferenceStates)
    s.schedules.push_back(decompose_initial_state(y, dmax, NodeRole::Private, kDefaultOffsetBound, rng));
  return s;
}

void BM_Simulate20(benchmark::State& state) {
  const Setup s = twenty_nodes(180);
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(s.g, s.schedules));
}
BENCHMARK(BM_Simulate20)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  Rng rng(1);
  const auto dmax = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(decompose_initial_state(13, dmax, NodeRole::Private, kDefaultOffsetBound, rng));
}
BENCHMARK(BM_Decompose)->Arg(2)->Arg(8)->Arg(19);

void BM_StrongConnectivity(benchmark::State& state) {
  Rng rng(2);
  const Digraph g = generate_random_strongly_connected(static_cast<std::size_t>(state.range(0)), 0.3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(is_strongly_connected(g));
}
BENCHMARK(BM_StrongConnectivity)->Arg(20)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
