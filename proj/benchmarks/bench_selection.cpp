#include <benchmark/benchmark.h>

#include "fedasm/laminar_selection.hpp"
#include "fedasm/priority_selection.hpp"
#include "fedasm/semilaminar_selection.hpp"

using namespace fedasm;

namespace {

void BM_DrawPriority(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const Instance inst = generate_instance(size, size, 1);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(draw_priority(inst, 5, rng));
}
BENCHMARK(BM_DrawPriority)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_SelectPriority(benchmark::State& state) {
  GeneratorOptions g;
  g.min_class_size = 5;
  const Instance inst = generate_instance(10, 10, 2, g);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(select_priority(inst, 5, rng));
}
BENCHMARK(BM_SelectPriority);

// Complete binary tree of the given depth with one class per leaf.
Instance binary_tree(int depth) {
  InstanceSpec spec;
  spec.nodes.push_back("v1");
  const int count = (1 << (depth + 1)) - 1;
  for (int v = 2; v <= count; ++v) {
    spec.nodes.push_back("v" + std::to_string(v));
    spec.edges.emplace_back("v" + std::to_string(v / 2), "v" + std::to_string(v));
  }
  for (int v = 1 << depth; v <= count; ++v) spec.classes.push_back({{"v" + std::to_string(v)}, 50 + 13 * (v % 7)});
  return Instance::build(std::move(spec));
}

void BM_LaminarSelector(benchmark::State& state) {
  const Instance inst = binary_tree(static_cast<int>(state.range(0)));
  const LaminarSelector select(inst, 10);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(select(rng));
  state.counters["nodes"] = static_cast<double>(inst.num_nodes());
}
BENCHMARK(BM_LaminarSelector)->DenseRange(1, 5);

Instance region_topic(std::size_t topics) {
  SemiLaminarLayout layout;
  layout.region_parent = {std::nullopt, 0, 0};
  layout.num_topics = topics;
  for (std::size_t region : {1, 2}) {
    for (std::size_t a = 0; a < topics; ++a) {
      for (std::size_t b = a + 1; b < topics; ++b) layout.classes.push_back({region, {a, b}, 40});
    }
  }
  return build_semilaminar(layout);
}

void BM_SemiLaminarSelector(benchmark::State& state) {
  const Instance inst = region_topic(static_cast<std::size_t>(state.range(0)));
  const SemiLaminarSelector select(inst, 8);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(select(rng));
}
BENCHMARK(BM_SemiLaminarSelector)->DenseRange(4, 7);  // three topics would need n = 12

}  // namespace
