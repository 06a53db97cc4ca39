#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fedasm/assignment.hpp"
#include "fedasm/errors.hpp"
#include "fedasm/instance.hpp"
#include "fedasm/random.hpp"

namespace fedasm {

struct RegularityReport {
  /// Largest e with e |N_{r,t}| <= w_{r,t} <= (1 - e) |N_{r,t}| everywhere.
  Rational epsilon;
  /// Largest d with |N_c| <= (1 - d) |N_f| on every edge.
  Rational delta;
  bool satisfied = false;
  std::vector<std::string> failures;
};

/// Requires a semi-laminar instance. Checks n >= 2 / (epsilon delta),
/// |N_v| >= 4n at every node and |C^L| >= 2 for every class.
RegularityReport check_regularity(const Instance& instance, std::int64_t n);

/// Selectable and unselectable members of one (region, topic) node.
struct TopicSets {
  std::vector<Member> sel;
  std::vector<Member> uns;
};

/// Per-region, per-topic partitions of one draw.
struct TopicPartition {
  std::vector<std::vector<std::int64_t>> s;       // [r][t]
  std::vector<std::vector<TopicSets>> sets;       // [r][t]
};

/// A class of a leaf region together with the topics its members signed up for.
struct LeafClass {
  ClassId cls;
  std::int64_t size = 0;
  std::vector<std::size_t> topics;
};

/// Partitions one leaf region: selectable seats are shared out among classes
/// in proportion to |C^T| / |T| and drawn as disjoint blocks of one class
/// permutation; unselectable seats go in proportion to |C^T| (1 - 1/|T|) and
/// avoid the same topic's selectable members.
std::vector<TopicSets> sample_leaves(std::span<const LeafClass> classes,
                                     std::span<const std::int64_t> s, std::int64_t n, Rng& rng);

struct ChildSets {
  std::span<const Member> sel;
  std::span<const Member> uns;
  Rational weight;             // w_{c,t}
  std::int64_t population = 0; // |N_{(c,t)}|
};

struct ChildSample {
  TopicSets sets;
  std::vector<std::int64_t> gamma_sel;
  std::vector<std::int64_t> gamma_uns;
};

/// Builds an internal (r, t) node from its children: s selectable and n - s
/// unselectable members, rounded jointly so each child keeps at least the
/// floor of its combined share.
ChildSample sample_from_children(std::int64_t s, std::int64_t n, std::span<const ChildSets> children,
                                 Rng& rng);

struct WeightedSet {
  std::span<const Member> members;
  Rational weight;
};

/// Rounds size * weight_i / sum(weight) with a fixed total and takes that
/// many members uniformly from each set.
std::vector<Member> round_and_sample(std::int64_t size, std::span<const WeightedSet> sets, Rng& rng);

struct SemiLaminarDraw {
  AssemblyAssignment assignment;
  TopicPartition partition;
};

/// Checks the preconditions once and caches the exact roundings, which only
/// depend on the instance and on the drawn s values. The instance must
/// outlive the selector. Copies share state; draws are thread-safe.
class SemiLaminarSelector {
 public:
  /// Throws PreconditionError unless the instance is semi-laminar and regular.
  SemiLaminarSelector(const Instance& instance, std::int64_t n);

  SemiLaminarDraw draw(Rng& rng) const;
  AssemblyAssignment operator()(Rng& rng) const { return draw(rng).assignment; }
  const SemiLaminarStructure& structure() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Throws PreconditionError unless the instance is semi-laminar and regular.
SemiLaminarDraw select_semilaminar_detailed(const Instance& instance, std::int64_t n, Rng& rng);

AssemblyAssignment select_semilaminar(const Instance& instance, std::int64_t n, Rng& rng);

/// Allowed shortfall below floor(n q) per edge, in `instance.edges()` order:
/// 1 on edges between topic nodes of nested regions, 0 on aggregator edges.
std::vector<std::int64_t> semilaminar_slack(const Instance& instance,
                                            const SemiLaminarStructure& structure);

}  // namespace fedasm
