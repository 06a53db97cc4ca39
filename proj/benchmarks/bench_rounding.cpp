#include <benchmark/benchmark.h>

#include "fedasm/rounding.hpp"

using namespace fedasm;

namespace {

// A leaf-region shaped problem: `classes` rows of `topics` coordinates, rows
// in one group and columns in the other.
RoundingProblem grid(std::size_t classes, std::size_t topics) {
  RoundingProblem p;
  for (std::size_t r = 0; r < classes; ++r) {
    for (std::size_t t = 0; t < topics; ++t) {
      p.marginals.push_back(make_rational(static_cast<std::int64_t>(1 + (r * 7 + t * 3) % 11), 4));
    }
  }
  for (std::size_t r = 0; r < classes; ++r) {
    ConstraintSet row{{}, 0, Side::Both};
    for (std::size_t t = 0; t < topics; ++t) row.members.push_back(r * topics + t);
    p.constraints.push_back(std::move(row));
  }
  for (std::size_t t = 0; t < topics; ++t) {
    ConstraintSet col{{}, 1, Side::Both};
    for (std::size_t r = 0; r < classes; ++r) col.members.push_back(r * topics + t);
    p.constraints.push_back(std::move(col));
  }
  return p;
}

void BM_PreparedRounding(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const PreparedRounding round(grid(n, n));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(round(rng));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PreparedRounding)->RangeMultiplier(2)->Range(2, 32)->Complexity();

void BM_RoundBihierarchyOneShot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RoundingProblem p = grid(n, n);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(round_bihierarchy(p, rng));
}
BENCHMARK(BM_RoundBihierarchyOneShot)->RangeMultiplier(2)->Range(2, 16);

void BM_FixedSum(benchmark::State& state) {
  std::vector<Rational> marginals;
  // Pairs 1/3, 2/3 keep the total integral.
  for (std::int64_t i = 0; i < state.range(0); ++i) marginals.push_back(make_rational(1 + i % 2, 3));
  const std::vector<std::int64_t> floors;
  const PreparedFixedSum round(marginals, floors);
  Rng rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(round(rng));
}
BENCHMARK(BM_FixedSum)->RangeMultiplier(4)->Range(4, 1024);

}  // namespace
