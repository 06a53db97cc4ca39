#include "fedasm/priority_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fedasm {

RestartsExhausted::RestartsExhausted(std::int64_t f)
    : std::runtime_error("priority selection failed on all " + std::to_string(f) + " attempts"),
      failures(f) {}

PriorityDraw draw_priority(const Instance& inst, std::int64_t n, Rng& rng) {
  if (n < 1) throw PreconditionError("assembly size must be positive");
  const std::size_t nodes = inst.num_nodes();
  const std::size_t classes = inst.num_classes();

  std::vector<std::vector<NodeId>> holders(classes);
  for (std::size_t v = 0; v < nodes; ++v) {
    for (ClassId c : inst.classes_of(node_id(v))) holders[idx(c)].push_back(node_id(v));
  }

  PriorityDraw draw;
  draw.n = n;
  draw.winners.assign(nodes, std::vector<ClassId>(static_cast<std::size_t>(n)));
  draw.ranks.n = n;
  draw.ranks.counts.assign(nodes, std::vector<std::int64_t>(classes, 0));

  std::vector<std::int64_t> weight(classes);
  std::vector<char> resolved(nodes);
  for (std::int64_t j = 0; j < n; ++j) {
    std::int64_t total = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      weight[c] = inst.class_size(class_id(c));
      total += weight[c];
    }
    std::fill(resolved.begin(), resolved.end(), 0);
    std::size_t open = nodes;
    while (open > 0) {
      auto ticket = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
      std::size_t c = 0;
      while (ticket >= weight[c]) ticket -= weight[c++];
      total -= weight[c];
      weight[c] = 0;
      for (NodeId v : holders[c]) {
        if (resolved[idx(v)]) continue;
        resolved[idx(v)] = 1;
        --open;
        draw.winners[idx(v)][static_cast<std::size_t>(j)] = class_id(c);
        ++draw.ranks.counts[idx(v)][c];
      }
    }
  }
  for (std::size_t v = 0; v < nodes && !draw.failed; ++v) {
    for (std::size_t c = 0; c < classes; ++c) {
      if (draw.ranks.counts[v][c] > inst.class_size(class_id(c))) {
        draw.failed = true;
        break;
      }
    }
  }
  return draw;
}

AssemblyAssignment select_priority(const Instance& inst, std::int64_t n, Rng& rng) {
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    if (inst.class_size(class_id(c)) < n) {
      throw PreconditionError("class " + std::to_string(c) + " has fewer than n = " +
                              std::to_string(n) +
                              " members; use the restarting variant for such instances");
    }
  }
  PriorityDraw draw = draw_priority(inst, n, rng);
  return lift(inst, draw.ranks, rng);
}

AssemblyAssignment select_priority_with_restart(const Instance& inst, std::int64_t n, Rng& rng,
                                                std::int64_t max_attempts) {
  if (max_attempts < 1) throw PreconditionError("max_attempts must be at least 1");
  for (std::int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    PriorityDraw draw = draw_priority(inst, n, rng);
    if (!draw.failed) return lift(inst, draw.ranks, rng);
  }
  throw RestartsExhausted(max_attempts);
}

double failure_probability_bound(const Instance& inst, std::int64_t n) {
  double bound = 0;
  for (NodeId leaf : inst.leaves()) {
    const double base = std::numbers::e * static_cast<double>(n) / static_cast<double>(inst.population(leaf));
    for (ClassId c : inst.classes_of(leaf)) {
      bound += std::pow(base, static_cast<double>(inst.class_size(c)));
      if (bound >= 1) return 1;
    }
  }
  return std::min(bound, 1.0);
}

}  // namespace fedasm
