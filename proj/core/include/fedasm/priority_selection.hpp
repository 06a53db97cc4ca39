#pragma once

#include <cstdint>
#include <vector>

#include "fedasm/assignment.hpp"
#include "fedasm/errors.hpp"
#include "fedasm/instance.hpp"
#include "fedasm/random.hpp"

namespace fedasm {

/// One run of the n priority orders, resolved at class level.
struct PriorityDraw {
  std::int64_t n = 0;
  /// winners[v][j]: class of the top-ranked member of N_v in order j.
  std::vector<std::vector<ClassId>> winners;
  /// ranks.counts[v][L] = r^L_v, the number of orders won by class L at v.
  CanonicalAssignment ranks;
  /// True when some r^L_v exceeds |C^L|; such a draw cannot be realized.
  bool failed = false;
};

/// Draws the n orders lazily. For each order the classes are visited in the
/// order of their top members, which is sequential sampling without
/// replacement proportional to class size; a node's winner is the first
/// visited class inside its population.
PriorityDraw draw_priority(const Instance& instance, std::int64_t n, Rng& rng);

/// Requires every class to have at least n members, so no draw can fail.
/// Throws PreconditionError otherwise.
AssemblyAssignment select_priority(const Instance& instance, std::int64_t n, Rng& rng);

class RestartsExhausted : public std::runtime_error {
 public:
  explicit RestartsExhausted(std::int64_t failures);
  std::int64_t failures;
};

/// Redraws from scratch whenever some class is asked for more members than
/// it has. Throws RestartsExhausted after `max_attempts` failed draws.
AssemblyAssignment select_priority_with_restart(const Instance& instance, std::int64_t n, Rng& rng,
                                                std::int64_t max_attempts = 1000);

/// Union bound on the failure probability of a single draw: the sum over
/// leaves l and classes C^L inside N_l of (e n / |N_l|)^{|C^L|}, capped at 1.
double failure_probability_bound(const Instance& instance, std::int64_t n);

}  // namespace fedasm
