#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedasm/random.hpp"
#include "fedasm/rational.hpp"

namespace fedasm {

class RoundingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when two sets of the same group neither nest nor are disjoint.
class NotABihierarchy : public RoundingError {
 public:
  NotABihierarchy(std::size_t first, std::size_t second);
  std::size_t first;
  std::size_t second;
};

/// ceil(x) with probability x - floor(x), floor(x) otherwise. x >= 0.
std::int64_t round_single(const Rational& x, Rng& rng);

/// Integral x with x_i in {floor p_i, ceil p_i}, sum x = sum p and E[x] = p.
/// Pairs the two lowest-index fractional coordinates at each step.
/// Requires an integral total and lower_bounds[i] <= floor(p_i).
std::vector<std::int64_t> round_fixed_sum(std::span<const Rational> marginals,
                                          std::span<const std::int64_t> lower_bounds, Rng& rng);

/// round_fixed_sum with validation and scaling done once, for repeated draws.
class PreparedFixedSum {
 public:
  PreparedFixedSum(std::span<const Rational> marginals, std::span<const std::int64_t> lower_bounds);
  std::vector<std::int64_t> operator()(Rng& rng) const;

 private:
  i128 scale_ = 1;
  std::vector<i128> values_;
};

enum class Side : unsigned { Floor = 1, Ceiling = 2, Both = 3 };

struct ConstraintSet {
  std::vector<std::size_t> members;
  int group = 0;  // 0 or 1; each group must be laminar
  Side side = Side::Both;
};

/// Marginals plus a two-group laminar constraint family. Every coordinate is
/// implicitly a singleton constraint, so x_i lands on floor or ceil of p_i.
struct RoundingProblem {
  std::vector<Rational> marginals;
  std::vector<ConstraintSet> constraints;
};

/// Throws NotABihierarchy naming the first offending pair of constraints.
void check_bihierarchy(const RoundingProblem& problem);

/// Dependent rounding preserving every marginal exactly while keeping each
/// constraint sum between the floor and the ceiling of its marginal sum.
/// Repeatedly shifts mass around a cycle of fractional arcs in the
/// constraint network, lowest arc index first.
std::vector<std::int64_t> round_bihierarchy(const RoundingProblem& problem, Rng& rng);

/// round_bihierarchy with the network built once, for repeated draws from
/// the same problem. Copies share the prepared state.
class PreparedRounding {
 public:
  explicit PreparedRounding(const RoundingProblem& problem);
  std::vector<std::int64_t> operator()(Rng& rng) const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

using OutcomeDistribution = std::map<std::vector<std::int64_t>, Rational>;

/// Exact law of round_bihierarchy, obtained by expanding both branches of
/// every decomposition step. Throws RoundingError when the dimension exceeds
/// `max_dimension`.
OutcomeDistribution exact_outcome_distribution(const RoundingProblem& problem,
                                               std::size_t max_dimension = 12);

/// Exact law of round_fixed_sum.
OutcomeDistribution exact_fixed_sum_distribution(std::span<const Rational> marginals,
                                                 std::size_t max_dimension = 12);

/// True when `x` respects every requested side of every constraint and each
/// coordinate is the floor or ceiling of its marginal.
bool satisfies_constraints(const RoundingProblem& problem, std::span<const std::int64_t> x);

}  // namespace fedasm
