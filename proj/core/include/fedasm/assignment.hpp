#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "fedasm/instance.hpp"
#include "fedasm/random.hpp"

namespace fedasm {

/// A person, identified by their class and their index within it.
struct Member {
  ClassId cls;
  std::int64_t index = 0;

  friend auto operator<=>(const Member&, const Member&) = default;
};

/// One concrete assembly (member list) per node.
struct AssemblyAssignment {
  std::int64_t n = 0;
  std::vector<std::vector<Member>> assemblies;  // indexed by node

  std::span<const Member> assembly(NodeId v) const { return assemblies[idx(v)]; }
  friend bool operator==(const AssemblyAssignment&, const AssemblyAssignment&) = default;
};

/// Per-(node, class) seat counts. Lifted to persons by one uniform
/// permutation per class, each assembly taking the class prefix of its count.
struct CanonicalAssignment {
  std::int64_t n = 0;
  std::vector<std::vector<std::int64_t>> counts;  // [node][class], dense

  std::int64_t count(NodeId v, ClassId c) const { return counts[idx(v)][idx(c)]; }
  friend bool operator==(const CanonicalAssignment&, const CanonicalAssignment&) = default;
  friend auto operator<=>(const CanonicalAssignment&, const CanonicalAssignment&) = default;
};

/// floor(n * q_{c,f}) for every edge, in `instance.edges()` order.
std::vector<std::int64_t> overlap_floors(const Instance& instance, std::int64_t n);

/// |A_f ∩ A_c| under prefix lifting: sum over classes of min(c_{f,L}, c_{c,L}).
std::int64_t canonical_overlap(const Instance& instance, const CanonicalAssignment& a,
                               NodeId parent, NodeId child);

/// Sizes, class containment, prefix inheritance and overlap floors.
/// `floors` as returned by overlap_floors.
bool is_ex_post_feasible(const Instance& instance, const CanonicalAssignment& a,
                         std::span<const std::int64_t> floors);

CanonicalAssignment to_canonical(const Instance& instance, const AssemblyAssignment& a);

/// Materializes the assignment with one uniform permutation per class.
AssemblyAssignment lift(const Instance& instance, const CanonicalAssignment& a, Rng& rng);

/// A finite distribution over canonical assignments.
struct RandomizedAssignment {
  std::int64_t n = 0;
  std::vector<CanonicalAssignment> support;
  std::vector<double> weights;
};

}  // namespace fedasm
