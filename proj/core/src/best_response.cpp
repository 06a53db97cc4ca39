#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "fedasm/optimizer.hpp"

namespace fedasm {

namespace {

struct ChildEdge {
  std::size_t edge;
  NodeId child;
  double weight;       // gradient coefficient of the overlap
  std::int64_t floor;  // floor(n q)
};

struct NodePlan {
  NodeId node;
  std::vector<ClassId> classes;
  std::vector<double> seat_weight;  // per entry of `classes`
  std::vector<ChildEdge> edges;     // edges to children
  double relaxed_bound = 0;
};

struct Candidate {
  double cost;
  std::vector<std::int64_t> counts;  // per entry of NodePlan::classes
};

/// Children-first search over per-node seat compositions. Leaves of the
/// search are complete ex-post-feasible canonical assignments.
class Search {
 public:
  Search(const Instance& inst, const ExAnteTargets& targets, const FeatureVector* gradient)
      : inst_(inst), n_(targets.n) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> seat_index;
    for (std::size_t i = 0; i < targets.seat_keys.size(); ++i) {
      seat_index[{idx(targets.seat_keys[i].first), idx(targets.seat_keys[i].second)}] = i;
    }
    std::vector<std::vector<ChildEdge>> child_edges(inst.num_nodes());
    const auto edges = inst.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double w = gradient ? gradient->overlaps[e] : 0.0;
      child_edges[idx(edges[e].parent)].push_back({e, edges[e].child, w, targets.overlap_floors[e]});
    }
    const auto topo = inst.topological_order();
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      NodePlan plan;
      plan.node = *it;
      for (ClassId c : inst.classes_of(*it)) {
        plan.classes.push_back(c);
        plan.seat_weight.push_back(gradient ? gradient->seats[seat_index.at({idx(*it), idx(c)})] : 0.0);
      }
      plan.edges = std::move(child_edges[idx(*it)]);
      plan.relaxed_bound = relaxed_bound(plan);
      plans_.push_back(std::move(plan));
    }
    suffix_bound_.assign(plans_.size() + 1, 0.0);
    for (std::size_t d = plans_.size(); d-- > 0;) {
      suffix_bound_[d] = suffix_bound_[d + 1] + plans_[d].relaxed_bound;
    }
    current_.n = n_;
    current_.counts.assign(inst.num_nodes(), std::vector<std::int64_t>(inst.num_classes(), 0));
  }

  /// Candidate compositions for plan d given the already fixed children.
  std::vector<Candidate> candidates(std::size_t d) const {
    const NodePlan& plan = plans_[d];
    const std::size_t k = plan.classes.size();
    std::vector<std::int64_t> cap(k);
    for (std::size_t i = 0; i < k; ++i) {
      const ClassId c = plan.classes[i];
      cap[i] = std::min(inst_.class_size(c), n_);
      if (!inst_.is_leaf(plan.node)) {
        std::int64_t best = 0;
        for (NodeId child : inst_.children(plan.node)) {
          if (inst_.contains(child, c)) best = std::max(best, current_.count(child, c));
        }
        cap[i] = std::min(cap[i], best);
      }
    }
    std::vector<std::int64_t> suffix_cap(k + 1, 0);
    for (std::size_t i = k; i-- > 0;) suffix_cap[i] = suffix_cap[i + 1] + cap[i];

    std::vector<Candidate> out;
    std::vector<std::int64_t> counts(k, 0);
    std::vector<std::int64_t> overlap(plan.edges.size(), 0);
    auto recurse = [&](auto&& self, std::size_t i, std::int64_t remaining, double cost) -> void {
      if (i == k) {
        if (remaining != 0) return;
        for (std::size_t e = 0; e < plan.edges.size(); ++e) {
          if (overlap[e] < plan.edges[e].floor) return;
        }
        out.push_back({cost, counts});
        return;
      }
      if (suffix_cap[i] < remaining) return;
      const ClassId c = plan.classes[i];
      const std::int64_t hi = std::min(cap[i], remaining);
      const std::int64_t lo = std::max<std::int64_t>(0, remaining - suffix_cap[i + 1]);
      for (std::int64_t x = lo; x <= hi; ++x) {
        double delta = plan.seat_weight[i] * static_cast<double>(x);
        for (std::size_t e = 0; e < plan.edges.size(); ++e) {
          const NodeId child = plan.edges[e].child;
          if (!inst_.contains(child, c)) continue;
          const std::int64_t m = std::min(x, current_.count(child, c));
          overlap[e] += m;
          delta += plan.edges[e].weight * static_cast<double>(m);
        }
        counts[i] = x;
        self(self, i + 1, remaining - x, cost + delta);
        for (std::size_t e = 0; e < plan.edges.size(); ++e) {
          const NodeId child = plan.edges[e].child;
          if (inst_.contains(child, c)) overlap[e] -= std::min(x, current_.count(child, c));
        }
      }
      counts[i] = 0;
    };
    recurse(recurse, 0, n_, 0.0);
    return out;
  }

  void assign(std::size_t d, const std::vector<std::int64_t>& counts) {
    const NodePlan& plan = plans_[d];
    for (std::size_t i = 0; i < plan.classes.size(); ++i) {
      current_.counts[idx(plan.node)][idx(plan.classes[i])] = counts[i];
    }
  }

  void clear(std::size_t d) {
    const NodePlan& plan = plans_[d];
    for (ClassId c : plan.classes) current_.counts[idx(plan.node)][idx(c)] = 0;
  }

  std::size_t depth() const { return plans_.size(); }
  double suffix_bound(std::size_t d) const { return suffix_bound_[d]; }
  const CanonicalAssignment& current() const { return current_; }

 private:
  /// Lower bound on a node's own cost ignoring its children's counts: an
  /// overlap never exceeds the node's own count, so a negative overlap
  /// coefficient is charged at most once per seat.
  double relaxed_bound(const NodePlan& plan) const {
    std::vector<std::pair<double, std::int64_t>> unit;
    for (std::size_t i = 0; i < plan.classes.size(); ++i) {
      double e = plan.seat_weight[i];
      for (const ChildEdge& edge : plan.edges) {
        if (inst_.contains(edge.child, plan.classes[i])) e += std::min(edge.weight, 0.0);
      }
      unit.emplace_back(e, std::min(inst_.class_size(plan.classes[i]), n_));
    }
    std::sort(unit.begin(), unit.end());
    double bound = 0;
    std::int64_t remaining = n_;
    for (const auto& [e, cap] : unit) {
      const std::int64_t take = std::min(cap, remaining);
      bound += e * static_cast<double>(take);
      remaining -= take;
    }
    if (remaining > 0) {
      throw ExPostInfeasible("node '" + inst_.name(plan.node) + "' has fewer than n members");
    }
    return bound;
  }

  const Instance& inst_;
  std::int64_t n_;
  std::vector<NodePlan> plans_;
  std::vector<double> suffix_bound_;
  CanonicalAssignment current_;
};

}  // namespace

BestResponse best_response(const Instance& inst, const ExAnteTargets& targets,
                           const FeatureVector& gradient, std::int64_t node_limit) {
  if (gradient.seats.size() != targets.seat_targets.size() ||
      gradient.overlaps.size() != targets.overlap_targets.size()) {
    throw std::invalid_argument("gradient dimensions do not match the targets");
  }
  Search search(inst, targets, &gradient);
  BestResponse out;
  out.stationary = std::all_of(gradient.seats.begin(), gradient.seats.end(), [](double g) { return g == 0; }) &&
                   std::all_of(gradient.overlaps.begin(), gradient.overlaps.end(), [](double g) { return g == 0; });
  double best = std::numeric_limits<double>::infinity();
  bool found = false;

  auto dfs = [&](auto&& self, std::size_t d, double cost) -> void {
    if (d == search.depth()) {
      if (cost < best) {
        best = cost;
        out.assignment = search.current();
        found = true;
      }
      return;
    }
    std::vector<Candidate> cands = search.candidates(d);
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
    for (const Candidate& cand : cands) {
      if (++out.nodes_explored > node_limit) {
        throw SearchLimitExceeded("best response exceeded its search node limit");
      }
      const double bound = cost + cand.cost + search.suffix_bound(d + 1);
      if (found && bound >= best - 1e-12 * (1.0 + std::abs(best))) break;
      search.assign(d, cand.counts);
      self(self, d + 1, cost + cand.cost);
      search.clear(d);
    }
  };
  dfs(dfs, 0, 0.0);
  if (!found) throw ExPostInfeasible("no ex-post-feasible canonical assignment exists");
  out.value = best;
  return out;
}

std::vector<CanonicalAssignment> enumerate_ex_post_feasible(const Instance& inst, std::int64_t n,
                                                            std::size_t cap) {
  const ExAnteTargets targets = ex_ante_targets(inst, n);
  std::vector<CanonicalAssignment> out;
  std::optional<Search> maybe;
  try {
    maybe.emplace(inst, targets, nullptr);
  } catch (const ExPostInfeasible&) {
    return out;
  }
  Search& search = *maybe;
  auto dfs = [&](auto&& self, std::size_t d) -> void {
    if (d == search.depth()) {
      if (out.size() >= cap) throw SearchLimitExceeded("more ex-post-feasible assignments than the cap");
      out.push_back(search.current());
      return;
    }
    for (const Candidate& cand : search.candidates(d)) {
      search.assign(d, cand.counts);
      self(self, d + 1);
      search.clear(d);
    }
  };
  dfs(dfs, 0);
  return out;
}

}  // namespace fedasm
