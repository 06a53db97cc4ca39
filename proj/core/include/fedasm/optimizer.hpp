#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedasm/assignment.hpp"
#include "fedasm/instance.hpp"
#include "fedasm/random.hpp"

namespace fedasm {

/// Ex ante targets as linear functionals of a canonical assignment:
/// E[c_{v,L}] = n |C^L| / |N_v| for every class inside N_v, and
/// E[overlap_{f,c}] >= n q_{c,f} for every edge.
struct ExAnteTargets {
  std::int64_t n = 0;
  std::vector<std::pair<NodeId, ClassId>> seat_keys;
  std::vector<Rational> seat_targets;
  std::vector<Rational> overlap_targets;    // instance.edges() order
  std::vector<std::int64_t> overlap_floors; // floor of overlap_targets
};

ExAnteTargets ex_ante_targets(const Instance& instance, std::int64_t n);

/// Seat counts and overlaps of one assignment in target order.
struct FeatureVector {
  std::vector<double> seats;
  std::vector<double> overlaps;
};

FeatureVector features(const Instance& instance, const ExAnteTargets& targets,
                       const CanonicalAssignment& a);

FeatureVector expected_features(const Instance& instance, const ExAnteTargets& targets,
                                std::span<const CanonicalAssignment> support,
                                std::span<const double> weights);

/// Squared seat deviations plus squared overlap shortfalls.
double loss(const ExAnteTargets& targets, const FeatureVector& expected);
double loss(const Instance& instance, const ExAnteTargets& targets, const RandomizedAssignment& r);

/// Gradient of the loss with respect to the expected features.
FeatureVector loss_gradient(const ExAnteTargets& targets, const FeatureVector& expected);

struct Deviation {
  double max_seat_deviation = 0;  // max |E c - t|
  double max_overlap_shortfall = 0;  // max (n q - E overlap)^+
};

Deviation deviation(const ExAnteTargets& targets, const FeatureVector& expected);

// ---------------------------------------------------------------------------
// Restricted master

class RestrictedSolveError : public std::runtime_error {
 public:
  RestrictedSolveError(const std::string& message, double gradient_norm);
  double gradient_norm;
};

struct RestrictedSolution {
  std::vector<double> weights;
  double loss = 0;
  std::int64_t iterations = 0;
};

/// Simplex-constrained least squares over the given support, solved by a
/// primal active-set method. Shortfalls enter through nonnegative slack
/// variables, so the hinge terms become ordinary squares.
RestrictedSolution solve_restricted(const Instance& instance, const ExAnteTargets& targets,
                                    std::span<const CanonicalAssignment> support,
                                    double tolerance = 1e-12, std::int64_t max_iterations = 0,
                                    std::span<const double> warm_start = {});

// ---------------------------------------------------------------------------
// Best response

class ExPostInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SearchLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BestResponse {
  CanonicalAssignment assignment;
  double value = 0;
  bool stationary = false;  // the gradient was identically zero
  std::int64_t nodes_explored = 0;
};

/// Minimizes <gradient, features(a)> over ex-post-feasible canonical
/// assignments a by depth-first branch and bound, children before parents.
BestResponse best_response(const Instance& instance, const ExAnteTargets& targets,
                           const FeatureVector& gradient, std::int64_t node_limit = 50'000'000);

/// Every ex-post-feasible canonical assignment. Throws SearchLimitExceeded
/// past `cap` assignments.
std::vector<CanonicalAssignment> enumerate_ex_post_feasible(const Instance& instance, std::int64_t n,
                                                            std::size_t cap = 1'000'000);

// ---------------------------------------------------------------------------
// Column generation

struct TraceRow {
  std::int64_t iteration = 0;
  std::size_t support_size = 0;
  double loss = 0;
  double wall_time_ms = 0;
};

struct ColumnGenerationOptions {
  /// Converged once every seat deviation and overlap shortfall is at most
  /// tolerance * n.
  double tolerance = 0.001;
  std::int64_t max_iterations = 1000;
  std::int64_t node_limit = 50'000'000;
};

struct ColumnGenerationResult {
  RandomizedAssignment randomized;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::string stop_reason;
  Deviation deviation;
  std::size_t columns = 0;
};

class NonConvergence : public std::runtime_error {
 public:
  explicit NonConvergence(ColumnGenerationResult result);
  ColumnGenerationResult result;
};

/// Returns on convergence; throws NonConvergence (carrying the partial
/// result and trace) on the iteration cap or a stationary best response.
ColumnGenerationResult column_generation(const Instance& instance, std::int64_t n,
                                         const ColumnGenerationOptions& options = {});

/// Same loop, never throws on non-convergence.
ColumnGenerationResult run_column_generation(const Instance& instance, std::int64_t n,
                                             const ColumnGenerationOptions& options = {});

/// Draws a support element by weight and lifts it with one uniform
/// permutation per class.
AssemblyAssignment sample_from_randomized(const Instance& instance, const RandomizedAssignment& r,
                                          Rng& rng);

// ---------------------------------------------------------------------------
// Exact feasibility

struct FeasibilityResult {
  bool feasible = false;
  /// Exact rational weights over `columns` when feasible.
  std::vector<Rational> weights;
  std::vector<CanonicalAssignment> columns;
  std::size_t enumerated = 0;

  RandomizedAssignment randomized(std::int64_t n) const;
};

/// Enumerates every ex-post-feasible canonical assignment and decides, in
/// exact arithmetic, whether some distribution over them meets every ex ante
/// target exactly.
FeasibilityResult feasibility_oracle(const Instance& instance, std::int64_t n,
                                     std::size_t cap = 1'000'000);

}  // namespace fedasm
