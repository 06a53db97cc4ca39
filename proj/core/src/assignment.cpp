#include "fedasm/assignment.hpp"

#include <algorithm>
#include <stdexcept>

namespace fedasm {

std::vector<std::int64_t> overlap_floors(const Instance& inst, std::int64_t n) {
  std::vector<std::int64_t> out;
  out.reserve(inst.edges().size());
  for (const Edge& e : inst.edges()) {
    out.push_back(floor_i64(make_rational(n) * quota(inst, e.parent, e.child)));
  }
  return out;
}

std::int64_t canonical_overlap(const Instance& inst, const CanonicalAssignment& a, NodeId parent,
                               NodeId child) {
  std::int64_t total = 0;
  for (ClassId c : inst.classes_of(child)) total += std::min(a.count(parent, c), a.count(child, c));
  return total;
}

bool is_ex_post_feasible(const Instance& inst, const CanonicalAssignment& a,
                         std::span<const std::int64_t> floors) {
  const std::size_t nodes = inst.num_nodes();
  const std::size_t classes = inst.num_classes();
  if (a.counts.size() != nodes) return false;
  for (std::size_t v = 0; v < nodes; ++v) {
    const NodeId node = node_id(v);
    if (a.counts[v].size() != classes) return false;
    std::int64_t sum = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      const std::int64_t x = a.counts[v][c];
      if (x < 0 || x > inst.class_size(class_id(c))) return false;
      if (x > 0 && !inst.contains(node, class_id(c))) return false;
      sum += x;
    }
    if (sum != a.n) return false;
    if (inst.is_leaf(node)) continue;
    for (ClassId c : inst.classes_of(node)) {
      std::int64_t best = 0;
      for (NodeId child : inst.children(node)) {
        if (inst.contains(child, c)) best = std::max(best, a.count(child, c));
      }
      if (a.count(node, c) > best) return false;
    }
  }
  const auto edges = inst.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (canonical_overlap(inst, a, edges[e].parent, edges[e].child) < floors[e]) return false;
  }
  return true;
}

CanonicalAssignment to_canonical(const Instance& inst, const AssemblyAssignment& a) {
  CanonicalAssignment out;
  out.n = a.n;
  out.counts.assign(inst.num_nodes(), std::vector<std::int64_t>(inst.num_classes(), 0));
  for (std::size_t v = 0; v < a.assemblies.size() && v < inst.num_nodes(); ++v) {
    for (const Member& m : a.assemblies[v]) {
      if (idx(m.cls) >= inst.num_classes()) throw std::out_of_range("member class out of range");
      ++out.counts[v][idx(m.cls)];
    }
  }
  return out;
}

AssemblyAssignment lift(const Instance& inst, const CanonicalAssignment& a, Rng& rng) {
  AssemblyAssignment out;
  out.n = a.n;
  out.assemblies.assign(inst.num_nodes(), {});
  for (auto& assembly : out.assemblies) assembly.reserve(static_cast<std::size_t>(a.n));
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    std::int64_t longest = 0;
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) longest = std::max(longest, a.counts[v][c]);
    if (longest == 0) continue;
    const auto order = sample_ordered(inst.class_size(class_id(c)), longest, rng);
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      for (std::int64_t j = 0; j < a.counts[v][c]; ++j) {
        out.assemblies[v].push_back({class_id(c), order[static_cast<std::size_t>(j)]});
      }
    }
  }
  return out;
}

}  // namespace fedasm
