#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedasm/assignment.hpp"
#include "fedasm/errors.hpp"
#include "fedasm/instance.hpp"
#include "fedasm/random.hpp"
#include "fedasm/rounding.hpp"

namespace fedasm {

struct LaminarDraw {
  AssemblyAssignment assignment;
  /// seats[f][k]: members federation f takes from its k-th child.
  std::vector<std::vector<std::int64_t>> seats;
};

/// Checks the preconditions and prepares the seat roundings once. The
/// instance must outlive the selector.
class LaminarSelector {
 public:
  /// Throws PreconditionError unless the instance is laminar and |N_v| >= n.
  LaminarSelector(const Instance& instance, std::int64_t n);

  LaminarDraw draw(Rng& rng) const;
  AssemblyAssignment operator()(Rng& rng) const { return draw(rng).assignment; }

 private:
  const Instance* inst_;
  std::int64_t n_;
  std::vector<std::optional<PreparedFixedSum>> seat_rounding_;  // per federation
};

/// Uniform n-subsets at the leaves, then, children first, each federation
/// rounds (n q_{c,f})_c to integers with floor lower bounds and takes that
/// many members uniformly from each child's assembly.
/// Throws PreconditionError unless the instance is laminar and |N_v| >= n.
LaminarDraw select_laminar_detailed(const Instance& instance, std::int64_t n, Rng& rng);

AssemblyAssignment select_laminar(const Instance& instance, std::int64_t n, Rng& rng);

/// Uniform n-subset of a population given as a list of classes.
std::vector<Member> sample_population(const Instance& instance, std::span<const ClassId> classes,
                                      std::int64_t n, Rng& rng);

/// k members of `source` chosen uniformly without replacement.
std::vector<Member> sample_members(std::span<const Member> source, std::int64_t k, Rng& rng);

}  // namespace fedasm
