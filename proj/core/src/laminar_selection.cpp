#include "fedasm/laminar_selection.hpp"

#include <algorithm>
#include <string>

#include "fedasm/rounding.hpp"

namespace fedasm {

std::vector<Member> sample_population(const Instance& inst, std::span<const ClassId> classes,
                                      std::int64_t n, Rng& rng) {
  std::vector<std::int64_t> prefix{0};
  for (ClassId c : classes) prefix.push_back(prefix.back() + inst.class_size(c));
  if (n > prefix.back()) throw SamplingInfeasible("population smaller than the requested sample");
  std::vector<Member> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t flat : sample_ordered(prefix.back(), n, rng)) {
    auto k = static_cast<std::size_t>(std::upper_bound(prefix.begin(), prefix.end(), flat) - prefix.begin() - 1);
    out.push_back({classes[k], flat - prefix[k]});
  }
  return out;
}

std::vector<Member> sample_members(std::span<const Member> source, std::int64_t k, Rng& rng) {
  if (k < 0 || static_cast<std::size_t>(k) > source.size()) {
    throw SamplingInfeasible("asked for " + std::to_string(k) + " members from a set of " +
                             std::to_string(source.size()));
  }
  std::vector<Member> copy(source.begin(), source.end());
  partial_shuffle(std::span<Member>(copy), static_cast<std::size_t>(k), rng);
  copy.resize(static_cast<std::size_t>(k));
  return copy;
}

LaminarSelector::LaminarSelector(const Instance& inst, std::int64_t n) : inst_(&inst), n_(n) {
  if (n < 1) throw PreconditionError("assembly size must be positive");
  if (const InstanceKind kind = classify(inst).kind; kind != InstanceKind::Laminar) {
    throw PreconditionError(std::string("laminar selection requires a laminar instance; this one is ") +
                            to_string(kind));
  }
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (inst.population(node_id(v)) < n) {
      throw PreconditionError("node '" + inst.name(node_id(v)) + "' has fewer than n members");
    }
  }
  seat_rounding_.resize(inst.num_nodes());
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    const NodeId f = node_id(v);
    if (inst.is_leaf(f)) continue;
    std::vector<Rational> marginals;
    std::vector<std::int64_t> floors;
    for (NodeId c : inst.children(f)) {
      marginals.push_back(make_rational(n) * quota(inst, f, c));
      floors.push_back(floor_i64(marginals.back()));
    }
    seat_rounding_[v].emplace(marginals, floors);
  }
}

LaminarDraw LaminarSelector::draw(Rng& rng) const {
  const Instance& inst = *inst_;
  LaminarDraw draw;
  draw.assignment.n = n_;
  draw.assignment.assemblies.assign(inst.num_nodes(), {});
  draw.seats.assign(inst.num_nodes(), {});
  const auto topo = inst.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const NodeId f = *it;
    auto& assembly = draw.assignment.assemblies[idx(f)];
    if (inst.is_leaf(f)) {
      assembly = sample_population(inst, inst.classes_of(f), n_, rng);
      continue;
    }
    draw.seats[idx(f)] = (*seat_rounding_[idx(f)])(rng);
    const auto children = inst.children(f);
    for (std::size_t k = 0; k < children.size(); ++k) {
      auto part = sample_members(draw.assignment.assemblies[idx(children[k])], draw.seats[idx(f)][k], rng);
      assembly.insert(assembly.end(), part.begin(), part.end());
    }
  }
  return draw;
}

LaminarDraw select_laminar_detailed(const Instance& inst, std::int64_t n, Rng& rng) {
  return LaminarSelector(inst, n).draw(rng);
}

AssemblyAssignment select_laminar(const Instance& inst, std::int64_t n, Rng& rng) {
  return select_laminar_detailed(inst, n, rng).assignment;
}

}  // namespace fedasm
