#include "fixtures.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "fedasm/random.hpp"
#include "fedasm/semilaminar_selection.hpp"

namespace fedasm::testing {

namespace {

std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

}  // namespace

Instance two_leaf(std::int64_t a, std::int64_t b) {
  InstanceSpec spec;
  spec.nodes = {"f", "a", "b"};
  spec.edges = {{"f", "a"}, {"f", "b"}};
  spec.classes = {{{"a"}, a}, {{"b"}, b}};
  return Instance::build(spec);
}

Instance non_tree_fixture(std::int64_t n, std::int64_t k) {
  InstanceSpec spec;
  spec.nodes = {"f", "all"};
  spec.classes = {{{"all"}, (2 * n - 1) * k}};
  for (std::int64_t j = 1; j <= 2 * n; ++j) {
    const std::string c = "c" + std::to_string(j);
    const std::string own = "only" + std::to_string(j);
    spec.nodes.push_back(c);
    spec.nodes.push_back(own);
    spec.edges.emplace_back("f", c);
    spec.edges.emplace_back(c, own);
    spec.edges.emplace_back(c, "all");
    spec.classes.push_back({{own}, k});
  }
  return Instance::build(std::move(spec));
}

Instance small_tree(std::int64_t l1, std::int64_t l2, std::int64_t extra) {
  InstanceSpec spec;
  spec.nodes = {"root", "mid", "l1", "l2"};
  spec.edges = {{"root", "mid"}, {"mid", "l1"}, {"mid", "l2"}};
  spec.classes = {{{"l1"}, l1}, {{"l2"}, l2}};
  if (extra > 0) {
    spec.nodes.push_back("l3");
    spec.edges.emplace_back("root", "l3");
    spec.classes.push_back({{"l3"}, extra});
  }
  return Instance::build(spec);
}

Instance random_laminar(std::uint64_t seed, std::int64_t min_size, std::int64_t max_size,
                        std::size_t max_nodes) {
  Rng rng(seed);
  const std::size_t nodes = 3 + rng.below(max_nodes - 2);
  std::vector<std::size_t> parent(nodes, 0);
  std::vector<std::size_t> children(nodes, 0);
  for (std::size_t v = 1; v < nodes; ++v) {
    parent[v] = rng.below(v);
    ++children[parent[v]];
  }
  InstanceSpec spec;
  for (std::size_t v = 0; v < nodes; ++v) spec.nodes.push_back("v" + std::to_string(v));
  for (std::size_t v = 1; v < nodes; ++v) spec.edges.emplace_back(spec.nodes[parent[v]], spec.nodes[v]);
  for (std::size_t v = 0; v < nodes; ++v) {
    if (children[v] == 0) spec.classes.push_back({{spec.nodes[v]}, uniform(rng, min_size, max_size)});
  }
  return Instance::build(spec);
}

SemiLaminarCase random_semilaminar(std::uint64_t seed) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 10'000; ++attempt) {
    SemiLaminarLayout layout;
    layout.num_topics = 3 + rng.below(2);
    const bool deep = rng.below(3) == 0;
    if (deep) {
      layout.region_parent = {std::nullopt, 0, 1, 1, 0};
    } else {
      layout.region_parent = {std::nullopt, 0, 0};
    }
    std::vector<char> internal(layout.region_parent.size(), 0);
    for (const auto& p : layout.region_parent) {
      if (p) internal[*p] = 1;
    }
    for (std::size_t r = 0; r < layout.region_parent.size(); ++r) {
      if (internal[r]) continue;
      // The lone leaf under the root balances a two-leaf subtree.
      const std::int64_t scale = deep && r == 4 ? 2 : 1;
      for (std::size_t a = 0; a < layout.num_topics; ++a) {
        for (std::size_t b = a + 1; b < layout.num_topics; ++b) {
          layout.classes.push_back({r, {a, b}, scale * uniform(rng, 14, 20)});
        }
      }
      if (rng.below(2) == 0) {
        std::vector<std::size_t> all(layout.num_topics);
        for (std::size_t t = 0; t < all.size(); ++t) all[t] = t;
        layout.classes.push_back({r, all, scale * uniform(rng, 2, 12)});
      }
    }
    Instance inst = build_semilaminar(layout);
    const RegularityReport report = check_regularity(inst, 1);
    const Rational product = report.epsilon * report.delta;
    if (product <= 0) continue;
    const std::int64_t n = ceil_i64(Rational(2) / product);
    if (n > 12) continue;
    if (check_regularity(inst, n).satisfied) return {std::move(inst), n};
  }
  throw std::runtime_error("no regular semi-laminar instance found");
}

SemiLaminarCase balanced_semilaminar(std::int64_t size) {
  SemiLaminarLayout layout;
  layout.num_topics = 4;
  layout.region_parent = {std::nullopt, 0, 0};
  for (std::size_t r = 1; r <= 2; ++r) {
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = a + 1; b < 4; ++b) layout.classes.push_back({r, {a, b}, size});
    }
  }
  return {build_semilaminar(layout), 8};
}

Instance restart_prone(std::uint64_t seed, std::int64_t n) {
  Rng rng(seed);
  const std::size_t leaves = 2 + rng.below(3);
  InstanceSpec spec;
  spec.nodes.push_back("root");
  for (std::size_t l = 0; l < leaves; ++l) {
    spec.nodes.push_back("l" + std::to_string(l));
    spec.edges.emplace_back("root", spec.nodes.back());
    spec.classes.push_back({{spec.nodes.back()}, uniform(rng, 100 * n, 130 * n)});
  }
  // Small classes over distinct leaf subsets of size at least two.
  std::vector<std::uint64_t> masks;
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << leaves); ++m) {
    if (std::popcount(m) >= 2) masks.push_back(m);
  }
  partial_shuffle(std::span<std::uint64_t>(masks), masks.size(), rng);
  const std::size_t small = std::min<std::size_t>(masks.size(), 2 + rng.below(4));
  for (std::size_t k = 0; k < small; ++k) {
    InstanceSpec::ClassSpec cls;
    for (std::size_t l = 0; l < leaves; ++l) {
      if (masks[k] >> l & 1) cls.leaves.push_back("l" + std::to_string(l));
    }
    cls.size = uniform(rng, 3, 5);
    spec.classes.push_back(std::move(cls));
  }
  return Instance::build(spec);
}

RoundingProblem random_rounding_problem(std::uint64_t seed, std::size_t max_dim) {
  Rng rng(seed);
  const std::size_t k = 2 + rng.below(max_dim - 1);
  RoundingProblem problem;
  for (std::size_t i = 0; i < k; ++i) {
    const std::int64_t den = uniform(rng, 2, 7);
    problem.marginals.push_back(make_rational(uniform(rng, 0, 3 * den - 1), den));
  }
  const Side sides[] = {Side::Floor, Side::Ceiling, Side::Both};
  for (int group = 0; group < 2; ++group) {
    // Intervals of a random order, kept when nested in or disjoint from the
    // ones already chosen, form a laminar family.
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    partial_shuffle(std::span<std::size_t>(order), k, rng);
    std::vector<std::pair<std::size_t, std::size_t>> kept;
    const std::size_t tries = 1 + rng.below(2 * k);
    for (std::size_t t = 0; t < tries; ++t) {
      std::size_t a = rng.below(k);
      std::size_t b = rng.below(k);
      if (a > b) std::swap(a, b);
      bool ok = true;
      for (auto [c, d] : kept) {
        const bool disjoint = b < c || d < a;
        const bool nested = (c <= a && b <= d) || (a <= c && d <= b);
        ok = ok && (disjoint || nested) && !(a == c && b == d);
      }
      if (!ok) continue;
      kept.emplace_back(a, b);
      ConstraintSet set;
      set.group = group;
      set.side = sides[rng.below(3)];
      for (std::size_t i = a; i <= b; ++i) set.members.push_back(order[i]);
      problem.constraints.push_back(std::move(set));
    }
  }
  return problem;
}

}  // namespace fedasm::testing
