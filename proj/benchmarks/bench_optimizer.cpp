#include <benchmark/benchmark.h>

#include "fedasm/optimizer.hpp"

using namespace fedasm;

namespace {

void BM_BestResponse(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const Instance inst = generate_instance(size, size, 5);
  const ExAnteTargets targets = ex_ante_targets(inst, 5);
  FeatureVector gradient;
  Rng rng(5);
  for (std::size_t i = 0; i < targets.seat_targets.size(); ++i) gradient.seats.push_back(rng.uniform01() - 0.5);
  for (std::size_t i = 0; i < targets.overlap_targets.size(); ++i) gradient.overlaps.push_back(-rng.uniform01());
  for (auto _ : state) benchmark::DoNotOptimize(best_response(inst, targets, gradient));
}
BENCHMARK(BM_BestResponse)->Arg(2)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_ColumnGeneration(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const Instance inst = generate_instance(size, size, 7);
  std::size_t support = 0;
  for (auto _ : state) {
    const ColumnGenerationResult r = run_column_generation(inst, 5);
    support = r.randomized.support.size();
    benchmark::DoNotOptimize(r);
  }
  state.counters["support"] = static_cast<double>(support);
}
BENCHMARK(BM_ColumnGeneration)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SampleRandomized(benchmark::State& state) {
  const Instance inst = generate_instance(3, 3, 7);
  const ColumnGenerationResult r = run_column_generation(inst, 5);
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(sample_from_randomized(inst, r.randomized, rng));
}
BENCHMARK(BM_SampleRandomized);

}  // namespace
