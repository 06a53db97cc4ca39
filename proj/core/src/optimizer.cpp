#include "fedasm/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace fedasm {

ExAnteTargets ex_ante_targets(const Instance& inst, std::int64_t n) {
  ExAnteTargets t;
  t.n = n;
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    const NodeId node = node_id(v);
    for (ClassId c : inst.classes_of(node)) {
      t.seat_keys.emplace_back(node, c);
      t.seat_targets.push_back(make_rational(n * inst.class_size(c), inst.population(node)));
    }
  }
  for (const Edge& e : inst.edges()) {
    t.overlap_targets.push_back(make_rational(n) * quota(inst, e.parent, e.child));
    t.overlap_floors.push_back(floor_i64(t.overlap_targets.back()));
  }
  return t;
}

FeatureVector features(const Instance& inst, const ExAnteTargets& t, const CanonicalAssignment& a) {
  FeatureVector f;
  f.seats.reserve(t.seat_keys.size());
  for (const auto& [v, c] : t.seat_keys) f.seats.push_back(static_cast<double>(a.count(v, c)));
  for (const Edge& e : inst.edges()) {
    f.overlaps.push_back(static_cast<double>(canonical_overlap(inst, a, e.parent, e.child)));
  }
  return f;
}

FeatureVector expected_features(const Instance& inst, const ExAnteTargets& t,
                                std::span<const CanonicalAssignment> support,
                                std::span<const double> weights) {
  FeatureVector out;
  out.seats.assign(t.seat_keys.size(), 0.0);
  out.overlaps.assign(t.overlap_targets.size(), 0.0);
  for (std::size_t s = 0; s < support.size(); ++s) {
    if (weights[s] == 0) continue;
    const FeatureVector f = features(inst, t, support[s]);
    for (std::size_t i = 0; i < f.seats.size(); ++i) out.seats[i] += weights[s] * f.seats[i];
    for (std::size_t i = 0; i < f.overlaps.size(); ++i) out.overlaps[i] += weights[s] * f.overlaps[i];
  }
  return out;
}

double loss(const ExAnteTargets& t, const FeatureVector& e) {
  double total = 0;
  for (std::size_t i = 0; i < e.seats.size(); ++i) {
    const double d = e.seats[i] - to_double(t.seat_targets[i]);
    total += d * d;
  }
  for (std::size_t i = 0; i < e.overlaps.size(); ++i) {
    const double d = std::max(0.0, to_double(t.overlap_targets[i]) - e.overlaps[i]);
    total += d * d;
  }
  return total;
}

double loss(const Instance& inst, const ExAnteTargets& t, const RandomizedAssignment& r) {
  return loss(t, expected_features(inst, t, r.support, r.weights));
}

FeatureVector loss_gradient(const ExAnteTargets& t, const FeatureVector& e) {
  FeatureVector g;
  for (std::size_t i = 0; i < e.seats.size(); ++i) {
    g.seats.push_back(2 * (e.seats[i] - to_double(t.seat_targets[i])));
  }
  for (std::size_t i = 0; i < e.overlaps.size(); ++i) {
    g.overlaps.push_back(-2 * std::max(0.0, to_double(t.overlap_targets[i]) - e.overlaps[i]));
  }
  return g;
}

Deviation deviation(const ExAnteTargets& t, const FeatureVector& e) {
  Deviation d;
  for (std::size_t i = 0; i < e.seats.size(); ++i) {
    d.max_seat_deviation = std::max(d.max_seat_deviation, std::abs(e.seats[i] - to_double(t.seat_targets[i])));
  }
  for (std::size_t i = 0; i < e.overlaps.size(); ++i) {
    d.max_overlap_shortfall =
        std::max(d.max_overlap_shortfall, to_double(t.overlap_targets[i]) - e.overlaps[i]);
  }
  return d;
}

NonConvergence::NonConvergence(ColumnGenerationResult r)
    : std::runtime_error("column generation did not converge: " + r.stop_reason), result(std::move(r)) {}

namespace {

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.seats.size(); ++i) s += a.seats[i] * b.seats[i];
  for (std::size_t i = 0; i < a.overlaps.size(); ++i) s += a.overlaps[i] * b.overlaps[i];
  return s;
}

RandomizedAssignment positive_part(std::int64_t n, const std::vector<CanonicalAssignment>& support,
                                   const std::vector<double>& weights) {
  RandomizedAssignment r;
  r.n = n;
  double total = 0;
  for (double w : weights) total += std::max(w, 0.0);
  for (std::size_t s = 0; s < support.size(); ++s) {
    if (weights[s] <= 0) continue;
    r.support.push_back(support[s]);
    r.weights.push_back(weights[s] / total);
  }
  return r;
}

}  // namespace

ColumnGenerationResult run_column_generation(const Instance& inst, std::int64_t n,
                                             const ColumnGenerationOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const ExAnteTargets targets = ex_ante_targets(inst, n);
  const double threshold = options.tolerance * static_cast<double>(n);

  FeatureVector zero;
  zero.seats.assign(targets.seat_keys.size(), 0.0);
  zero.overlaps.assign(targets.overlap_targets.size(), 0.0);

  std::vector<CanonicalAssignment> support{best_response(inst, targets, zero, options.node_limit).assignment};
  std::vector<double> weights{1.0};
  ColumnGenerationResult result;
  for (std::int64_t iteration = 1;; ++iteration) {
    const RestrictedSolution sol = solve_restricted(inst, targets, support, 1e-12, 0, weights);
    weights = sol.weights;
    const FeatureVector expected = expected_features(inst, targets, support, weights);
    result.deviation = deviation(targets, expected);
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    result.trace.push_back({iteration, support.size(), loss(targets, expected), ms});

    if (result.deviation.max_seat_deviation <= threshold &&
        result.deviation.max_overlap_shortfall <= threshold) {
      result.converged = true;
      result.stop_reason = "converged";
      break;
    }
    if (iteration >= options.max_iterations) {
      result.stop_reason = "iteration cap reached";
      break;
    }
    const FeatureVector gradient = loss_gradient(targets, expected);
    const BestResponse br = best_response(inst, targets, gradient, options.node_limit);
    const double gap = dot(gradient, expected) - br.value;
    if (gap < 1e-12 || std::find(support.begin(), support.end(), br.assignment) != support.end()) {
      result.stop_reason = "stationary: best response does not improve the linearized loss";
      break;
    }
    support.push_back(br.assignment);
    weights.push_back(0.0);
  }
  result.columns = support.size();
  result.randomized = positive_part(n, support, weights);
  return result;
}

ColumnGenerationResult column_generation(const Instance& inst, std::int64_t n,
                                         const ColumnGenerationOptions& options) {
  ColumnGenerationResult result = run_column_generation(inst, n, options);
  if (!result.converged) throw NonConvergence(std::move(result));
  return result;
}

AssemblyAssignment sample_from_randomized(const Instance& inst, const RandomizedAssignment& r,
                                          Rng& rng) {
  if (r.support.empty()) throw std::invalid_argument("randomized assignment has empty support");
  const double total = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
  double u = rng.uniform01() * total;
  std::size_t pick = 0;
  for (std::size_t s = 0; s < r.weights.size(); ++s) {
    if (r.weights[s] > 0) pick = s;
  }
  for (std::size_t s = 0; s < r.weights.size(); ++s) {
    if (u < r.weights[s]) {
      pick = s;
      break;
    }
    u -= r.weights[s];
  }
  return lift(inst, r.support[pick], rng);
}

}  // namespace fedasm
