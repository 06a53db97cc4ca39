#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedasm/instance.hpp"
#include "fedasm/rounding.hpp"

namespace fedasm::testing {

/// Federation "f" over leaves "a" and "b" with one class each.
Instance two_leaf(std::int64_t a, std::int64_t b);

/// The single-federation impossibility construction with every class moved
/// to its own leaf below the former leaves: a DAG that is not a tree, with
/// singleton classes. Classifies as General.
Instance non_tree_fixture(std::int64_t n, std::int64_t k);

/// Laminar chain root -> mid -> {l1, l2} plus root -> l3 when `extra` > 0.
Instance small_tree(std::int64_t l1, std::int64_t l2, std::int64_t extra = 0);

/// Random laminar tree with 2 to `max_nodes` nodes and singleton classes of
/// size in [min_size, max_size].
Instance random_laminar(std::uint64_t seed, std::int64_t min_size, std::int64_t max_size,
                        std::size_t max_nodes = 7);

struct SemiLaminarCase {
  Instance instance;
  std::int64_t n = 0;
};

/// Random regular semi-laminar instance with the smallest admissible n.
/// Retries internally until check_regularity accepts.
SemiLaminarCase random_semilaminar(std::uint64_t seed);

/// Root plus two leaf regions, four topics, every pair of topics signed up
/// for by a class of `size` members; epsilon = delta = 1/2, so n = 8.
SemiLaminarCase balanced_semilaminar(std::int64_t size = 11);

/// Leaves with a few small classes next to one large class each, for
/// exercising priority selection restarts.
Instance restart_prone(std::uint64_t seed, std::int64_t n);

/// Random two-group laminar constraint family over 2..max_dim coordinates
/// with small-denominator marginals and random sides.
RoundingProblem random_rounding_problem(std::uint64_t seed, std::size_t max_dim = 6);

}  // namespace fedasm::testing
