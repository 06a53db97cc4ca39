#include "fedasm/instance.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

namespace fedasm {

const char* to_string(IssueKind kind) {
  switch (kind) {
    case IssueKind::EmptyNodeList: return "empty_node_list";
    case IssueKind::DuplicateNode: return "duplicate_node";
    case IssueKind::UnknownEdgeEndpoint: return "unknown_edge_endpoint";
    case IssueKind::SelfLoop: return "self_loop";
    case IssueKind::DuplicateEdge: return "duplicate_edge";
    case IssueKind::Cycle: return "cycle";
    case IssueKind::EmptyClassList: return "empty_class_list";
    case IssueKind::EmptyLeafSet: return "empty_leaf_set";
    case IssueKind::UnknownClassLeaf: return "unknown_class_leaf";
    case IssueKind::ClassLeafNotLeaf: return "class_leaf_not_leaf";
    case IssueKind::DuplicateClass: return "duplicate_class";
    case IssueKind::NonPositiveClassSize: return "non_positive_class_size";
    case IssueKind::LeafWithoutClass: return "leaf_without_class";
    case IssueKind::UnrepresentedClass: return "unrepresented_class";
    case IssueKind::PopulationBelowAssemblySize: return "population_below_assembly_size";
  }
  return "unknown";
}

bool ValidationReport::ok() const {
  return std::none_of(issues.begin(), issues.end(), [](const auto& i) { return i.is_error; });
}

bool ValidationReport::has(IssueKind kind) const {
  return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& issue : issues) {
    if (!first) out << "; ";
    first = false;
    out << (issue.is_error ? "error" : "warning") << " " << to_string(issue.kind) << " ["
        << issue.subject << "]: " << issue.message;
  }
  return out.str();
}

InvalidInstance::InvalidInstance(ValidationReport report)
    : std::runtime_error("invalid instance: " + report.summary()), report_(std::move(report)) {}

namespace {

// Kahn's algorithm over parent->child edges; ties broken by node index.
std::vector<std::size_t> topo_sort(const std::vector<std::vector<std::size_t>>& children,
                                   const std::vector<std::vector<std::size_t>>& parents) {
  const std::size_t n = children.size();
  std::vector<std::size_t> indeg(n);
  for (std::size_t v = 0; v < n; ++v) indeg[v] = parents[v].size();
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) ready.insert(v);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (std::size_t c : children[v]) {
      if (--indeg[c] == 0) ready.insert(c);
    }
  }
  return order;
}

void add_issue(ValidationReport& r, IssueKind k, std::string subject, std::string msg,
               bool error = true) {
  r.issues.push_back({k, error, std::move(subject), std::move(msg)});
}

}  // namespace

ValidationReport validate(const InstanceSpec& spec, std::optional<std::int64_t> assembly_size) {
  ValidationReport report;
  if (spec.nodes.empty()) {
    add_issue(report, IssueKind::EmptyNodeList, "nodes", "instance has no nodes");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (!index.emplace(spec.nodes[i], i).second) {
      add_issue(report, IssueKind::DuplicateNode, spec.nodes[i], "node id declared twice");
    }
  }
  const std::size_t n = spec.nodes.size();
  std::vector<std::vector<std::size_t>> children(n), parents(n);
  std::set<std::pair<std::size_t, std::size_t>> seen_edges;
  for (const auto& [p, c] : spec.edges) {
    const std::string subject = p + "->" + c;
    auto pi = index.find(p);
    auto ci = index.find(c);
    if (pi == index.end() || ci == index.end()) {
      add_issue(report, IssueKind::UnknownEdgeEndpoint, subject,
                "edge endpoint '" + (pi == index.end() ? p : c) + "' is not a declared node");
      continue;
    }
    if (pi->second == ci->second) {
      add_issue(report, IssueKind::SelfLoop, subject, "self loop");
      continue;
    }
    if (!seen_edges.emplace(pi->second, ci->second).second) {
      add_issue(report, IssueKind::DuplicateEdge, subject, "edge declared twice");
      continue;
    }
    children[pi->second].push_back(ci->second);
    parents[ci->second].push_back(pi->second);
  }
  auto order = topo_sort(children, parents);
  const bool acyclic = order.size() == n;
  if (!acyclic) {
    std::vector<char> placed(n, 0);
    for (auto v : order) placed[v] = 1;
    std::string members;
    for (std::size_t v = 0; v < n; ++v) {
      if (!placed[v]) members += (members.empty() ? "" : ",") + spec.nodes[v];
    }
    add_issue(report, IssueKind::Cycle, members, "edge relation contains a cycle");
  }

  if (spec.classes.empty()) {
    add_issue(report, IssueKind::EmptyClassList, "classes", "instance has no equivalence classes");
  }
  std::vector<char> leaf_covered(n, 0);
  std::set<std::vector<std::size_t>> leaf_sets;
  for (std::size_t k = 0; k < spec.classes.size(); ++k) {
    const auto& cls = spec.classes[k];
    const std::string subject = "class[" + std::to_string(k) + "]";
    if (cls.size < 1) {
      add_issue(report, IssueKind::NonPositiveClassSize, subject,
                "class size must be at least 1 (got " + std::to_string(cls.size) + ")");
    }
    if (cls.leaves.empty()) {
      add_issue(report, IssueKind::EmptyLeafSet, subject, "class has no leaves");
      continue;
    }
    std::vector<std::size_t> ids;
    bool ok = true;
    for (const auto& leaf : cls.leaves) {
      auto it = index.find(leaf);
      if (it == index.end()) {
        add_issue(report, IssueKind::UnknownClassLeaf, subject,
                  "leaf '" + leaf + "' is not a declared node");
        ok = false;
        continue;
      }
      if (!children[it->second].empty()) {
        add_issue(report, IssueKind::ClassLeafNotLeaf, subject,
                  "'" + leaf + "' is a federation; classes sign up for leaves only");
        ok = false;
        continue;
      }
      ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!ok) continue;
    if (!leaf_sets.insert(ids).second) {
      add_issue(report, IssueKind::DuplicateClass, subject, "another class has the same leaf set");
    }
    for (auto v : ids) leaf_covered[v] = 1;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (children[v].empty() && !leaf_covered[v] && !spec.classes.empty()) {
      add_issue(report, IssueKind::LeafWithoutClass, spec.nodes[v],
                "leaf has an empty population");
    }
  }
  if (!report.ok()) return report;

  // The rest needs a well-formed instance.
  Instance inst = Instance::build(spec);
  auto extra = validate(inst, assembly_size);
  for (auto& issue : extra.issues) report.issues.push_back(std::move(issue));
  return report;
}

ValidationReport validate(const Instance& inst, std::optional<std::int64_t> assembly_size) {
  ValidationReport report;
  const bool has_federations = !inst.federations().empty();
  if (has_federations) {
    for (std::size_t k = 0; k < inst.num_classes(); ++k) {
      bool represented = false;
      for (NodeId v : inst.federations()) {
        if (inst.contains(v, class_id(k))) {
          represented = true;
          break;
        }
      }
      if (!represented) {
        add_issue(report, IssueKind::UnrepresentedClass, "class[" + std::to_string(k) + "]",
                  "class is not reachable from any federation", false);
      }
    }
  }
  if (assembly_size) {
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      if (inst.population(node_id(v)) < *assembly_size) {
        add_issue(report, IssueKind::PopulationBelowAssemblySize, inst.name(node_id(v)),
                  "population " + std::to_string(inst.population(node_id(v))) +
                      " is below the assembly size " + std::to_string(*assembly_size));
      }
    }
  }
  return report;
}

Instance Instance::build(InstanceSpec spec) {
  // Structural checks only; the detailed report is produced on failure.
  {
    std::unordered_map<std::string, std::size_t> index;
    bool bad = spec.nodes.empty() || spec.classes.empty();
    for (std::size_t i = 0; i < spec.nodes.size() && !bad; ++i) {
      bad = !index.emplace(spec.nodes[i], i).second;
    }
    if (!bad) {
      std::set<std::pair<std::size_t, std::size_t>> seen;
      std::vector<std::vector<std::size_t>> ch(spec.nodes.size()), pa(spec.nodes.size());
      for (const auto& [p, c] : spec.edges) {
        auto pi = index.find(p);
        auto ci = index.find(c);
        if (pi == index.end() || ci == index.end() || pi->second == ci->second ||
            !seen.emplace(pi->second, ci->second).second) {
          bad = true;
          break;
        }
        ch[pi->second].push_back(ci->second);
        pa[ci->second].push_back(pi->second);
      }
      if (!bad) bad = topo_sort(ch, pa).size() != spec.nodes.size();
      if (!bad) {
        std::set<std::vector<std::size_t>> sets;
        std::vector<char> covered(spec.nodes.size(), 0);
        for (const auto& cls : spec.classes) {
          if (cls.size < 1 || cls.leaves.empty()) {
            bad = true;
            break;
          }
          std::vector<std::size_t> ids;
          for (const auto& leaf : cls.leaves) {
            auto it = index.find(leaf);
            if (it == index.end() || !ch[it->second].empty()) {
              bad = true;
              break;
            }
            ids.push_back(it->second);
          }
          if (bad) break;
          std::sort(ids.begin(), ids.end());
          ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
          if (!sets.insert(ids).second) {
            bad = true;
            break;
          }
          for (auto v : ids) covered[v] = 1;
        }
        for (std::size_t v = 0; v < spec.nodes.size() && !bad; ++v) {
          if (ch[v].empty() && !covered[v]) bad = true;
        }
      }
    }
    if (bad) throw InvalidInstance(validate(spec));
  }

  Instance inst;
  const std::size_t n = spec.nodes.size();
  inst.names_ = spec.nodes;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(spec.nodes[i], i);
  inst.children_.resize(n);
  inst.parents_.resize(n);
  std::vector<std::vector<std::size_t>> ch(n), pa(n);
  for (const auto& [p, c] : spec.edges) {
    std::size_t pi = index.at(p), ci = index.at(c);
    ch[pi].push_back(ci);
    pa[ci].push_back(pi);
    inst.children_[pi].push_back(node_id(ci));
    inst.parents_[ci].push_back(node_id(pi));
  }
  for (auto v : topo_sort(ch, pa)) inst.topo_.push_back(node_id(v));
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId c : inst.children_[v]) inst.edges_.push_back({node_id(v), c});
  }

  for (const auto& cls : spec.classes) {
    EquivalenceClass ec;
    ec.size = cls.size;
    for (const auto& leaf : cls.leaves) ec.leaves.push_back(node_id(index.at(leaf)));
    std::sort(ec.leaves.begin(), ec.leaves.end());
    ec.leaves.erase(std::unique(ec.leaves.begin(), ec.leaves.end()), ec.leaves.end());
    inst.classes_.push_back(std::move(ec));
  }
  const std::size_t k = inst.classes_.size();

  // Descendant leaves, bottom-up.
  inst.descendant_leaves_.resize(n);
  for (auto it = inst.topo_.rbegin(); it != inst.topo_.rend(); ++it) {
    const std::size_t v = idx(*it);
    auto& out = inst.descendant_leaves_[v];
    if (inst.children_[v].empty()) {
      out.push_back(*it);
      continue;
    }
    for (NodeId c : inst.children_[v]) {
      const auto& sub = inst.descendant_leaves_[idx(c)];
      out.insert(out.end(), sub.begin(), sub.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  // Class membership via the graph: N_leaf from sign-ups, N_f = union of N_c.
  inst.contains_.assign(n * k, 0);
  for (std::size_t c = 0; c < k; ++c) {
    for (NodeId leaf : inst.classes_[c].leaves) inst.contains_[idx(leaf) * k + c] = 1;
  }
  for (auto it = inst.topo_.rbegin(); it != inst.topo_.rend(); ++it) {
    const std::size_t v = idx(*it);
    for (NodeId child : inst.children_[v]) {
      for (std::size_t c = 0; c < k; ++c) {
        if (inst.contains_[idx(child) * k + c]) inst.contains_[v * k + c] = 1;
      }
    }
  }
  inst.classes_of_.resize(n);
  inst.population_.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t c = 0; c < k; ++c) {
      if (inst.contains_[v * k + c]) {
        inst.classes_of_[v].push_back(class_id(c));
        inst.population_[v] += inst.classes_[c].size;
      }
    }
  }
  for (const auto& c : inst.classes_) inst.total_population_ += c.size;
  inst.spec_ = std::move(spec);
  return inst;
}

std::optional<NodeId> Instance::find(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return node_id(static_cast<std::size_t>(it - names_.begin()));
}

NodeId Instance::at(const std::string& name) const {
  auto v = find(name);
  if (!v) throw std::out_of_range("unknown node '" + name + "'");
  return *v;
}

bool Instance::is_child(NodeId parent, NodeId child) const {
  const auto& ch = children_[idx(parent)];
  return std::find(ch.begin(), ch.end(), child) != ch.end();
}

std::vector<NodeId> Instance::leaves() const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < num_nodes(); ++v) {
    if (is_leaf(node_id(v))) out.push_back(node_id(v));
  }
  return out;
}

std::vector<NodeId> Instance::federations() const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < num_nodes(); ++v) {
    if (!is_leaf(node_id(v))) out.push_back(node_id(v));
  }
  return out;
}

std::int64_t multiplicity(const Instance& inst, NodeId federation, ClassId c) {
  std::int64_t m = 0;
  for (NodeId child : inst.children(federation)) {
    if (inst.contains(child, c)) ++m;
  }
  return m;
}

Rational weighted_population(const Instance& inst, NodeId federation, NodeId child) {
  if (!inst.is_child(federation, child)) {
    throw std::invalid_argument("'" + inst.name(child) + "' is not a child of '" +
                                inst.name(federation) + "'");
  }
  Rational w = 0;
  for (ClassId c : inst.classes_of(child)) {
    w += make_rational(inst.class_size(c), multiplicity(inst, federation, c));
  }
  return w;
}

Rational quota(const Instance& inst, NodeId federation, NodeId child) {
  return weighted_population(inst, federation, child) /
         make_rational(inst.population(federation));
}

std::int64_t population_via_classes(const Instance& inst, NodeId v) {
  const auto desc = inst.descendant_leaves(v);
  std::int64_t total = 0;
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    const auto& leaves = inst.equivalence_class(class_id(c)).leaves;
    bool meets = std::any_of(leaves.begin(), leaves.end(), [&](NodeId l) {
      return std::binary_search(desc.begin(), desc.end(), l);
    });
    if (meets) total += inst.class_size(class_id(c));
  }
  return total;
}

// ---------------------------------------------------------------------------

const char* to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::Laminar: return "laminar";
    case InstanceKind::SemiLaminar: return "semilaminar";
    case InstanceKind::General: return "general";
  }
  return "unknown";
}

std::vector<std::size_t> SemiLaminarStructure::regions_bottom_up() const {
  std::vector<std::size_t> order;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t r = queue.front();
    queue.pop_front();
    order.push_back(r);
    for (auto c : region_children[r]) queue.push_back(c);
  }
  std::reverse(order.begin(), order.end());
  return order;
}

namespace {

bool is_laminar(const Instance& inst) {
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (inst.parents(node_id(v)).size() > 1) return false;
  }
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    if (inst.equivalence_class(class_id(c)).leaves.size() != 1) return false;
  }
  return true;
}

std::optional<SemiLaminarStructure> match_semilaminar(const Instance& inst) {
  const std::size_t n = inst.num_nodes();
  std::vector<NodeId> stars;
  for (std::size_t v = 0; v < n; ++v) {
    if (inst.parents(node_id(v)).empty()) stars.push_back(node_id(v));
  }
  if (stars.empty()) return std::nullopt;
  const std::size_t num_topics = inst.children(stars[0]).size();
  if (num_topics == 0 || stars.size() * (num_topics + 1) != n) return std::nullopt;

  std::vector<char> is_star(n, 0);
  for (NodeId s : stars) is_star[idx(s)] = 1;
  // Every non-star node has exactly one star parent.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> star_of(n, kNone);  // index into `stars`
  for (std::size_t s = 0; s < stars.size(); ++s) {
    if (inst.children(stars[s]).size() != num_topics) return std::nullopt;
    for (NodeId c : inst.children(stars[s])) {
      if (is_star[idx(c)] || star_of[idx(c)] != kNone) return std::nullopt;
      star_of[idx(c)] = s;
    }
  }
  std::vector<std::optional<NodeId>> topic_parent(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (is_star[v]) continue;
    if (star_of[v] == kNone) return std::nullopt;
    std::size_t non_star_parents = 0;
    for (NodeId p : inst.parents(node_id(v))) {
      if (is_star[idx(p)]) continue;
      ++non_star_parents;
      topic_parent[v] = p;
    }
    if (inst.parents(node_id(v)).size() != non_star_parents + 1 || non_star_parents > 1) {
      return std::nullopt;
    }
  }
  // Region tree from the topic-parent relation.
  std::vector<std::optional<std::size_t>> star_parent(stars.size());
  std::vector<char> star_parent_set(stars.size(), 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (is_star[v]) continue;
    const std::size_t s = star_of[v];
    std::optional<std::size_t> p;
    if (topic_parent[v]) p = star_of[idx(*topic_parent[v])];
    if (!star_parent_set[s]) {
      star_parent[s] = p;
      star_parent_set[s] = 1;
    } else if (star_parent[s] != p) {
      return std::nullopt;
    }
  }
  std::optional<std::size_t> root_star;
  for (std::size_t s = 0; s < stars.size(); ++s) {
    if (!star_parent[s]) {
      if (root_star) return std::nullopt;
      root_star = s;
    }
  }
  if (!root_star) return std::nullopt;
  std::vector<std::vector<std::size_t>> star_children(stars.size());
  for (std::size_t s = 0; s < stars.size(); ++s) {
    if (star_parent[s]) star_children[*star_parent[s]].push_back(s);
  }

  SemiLaminarStructure out;
  out.num_topics = num_topics;
  // Regions numbered breadth-first from the root.
  std::vector<std::size_t> region_of_star(stars.size(), kNone);
  std::vector<std::size_t> bfs{*root_star};
  region_of_star[*root_star] = 0;
  for (std::size_t i = 0; i < bfs.size(); ++i) {
    for (auto c : star_children[bfs[i]]) {
      if (region_of_star[c] != kNone) return std::nullopt;
      region_of_star[c] = bfs.size();
      bfs.push_back(c);
    }
  }
  if (bfs.size() != stars.size()) return std::nullopt;
  const std::size_t num_regions = stars.size();
  out.region_parent.resize(num_regions);
  out.region_children.resize(num_regions);
  out.star.resize(num_regions);
  for (std::size_t r = 0; r < num_regions; ++r) {
    const std::size_t s = bfs[r];
    out.star[r] = stars[s];
    if (star_parent[s]) out.region_parent[r] = region_of_star[*star_parent[s]];
    for (auto c : star_children[s]) out.region_children[r].push_back(region_of_star[c]);
  }

  // Topics: propagate from the root region's topic nodes down each copy.
  out.topic_node.assign(num_regions, std::vector<NodeId>(num_topics));
  std::vector<std::size_t> topic_of(n, kNone);
  std::vector<std::vector<char>> filled(num_regions, std::vector<char>(num_topics, 0));
  std::deque<NodeId> queue;
  const auto root_topics = inst.children(out.star[0]);
  for (std::size_t t = 0; t < num_topics; ++t) {
    topic_of[idx(root_topics[t])] = t;
    out.topic_node[0][t] = root_topics[t];
    filled[0][t] = 1;
    queue.push_back(root_topics[t]);
  }
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    const std::size_t r = region_of_star[star_of[idx(v)]];
    const std::size_t t = topic_of[idx(v)];
    const auto kids = inst.children(v);
    if (kids.size() != out.region_children[r].size()) return std::nullopt;
    std::set<std::size_t> child_regions;
    for (NodeId c : kids) {
      if (is_star[idx(c)]) return std::nullopt;
      const std::size_t cr = region_of_star[star_of[idx(c)]];
      if (out.region_parent[cr] != r || !child_regions.insert(cr).second) return std::nullopt;
      if (filled[cr][t] || topic_of[idx(c)] != kNone) return std::nullopt;
      filled[cr][t] = 1;
      topic_of[idx(c)] = t;
      out.topic_node[cr][t] = c;
      queue.push_back(c);
    }
  }
  for (const auto& row : filled) {
    for (char f : row) {
      if (!f) return std::nullopt;
    }
  }

  // Every class lives in exactly one leaf region.
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    const auto& leaves = inst.equivalence_class(class_id(c)).leaves;
    std::optional<std::size_t> region;
    std::vector<std::size_t> topics;
    for (NodeId l : leaves) {
      if (is_star[idx(l)]) return std::nullopt;
      const std::size_t r = region_of_star[star_of[idx(l)]];
      if (region && *region != r) return std::nullopt;
      region = r;
      topics.push_back(topic_of[idx(l)]);
    }
    std::sort(topics.begin(), topics.end());
    out.class_region.push_back(*region);
    out.class_topics.push_back(std::move(topics));
  }
  return out;
}

}  // namespace

Classification classify(const Instance& inst) {
  Classification out;
  if (is_laminar(inst)) {
    out.kind = InstanceKind::Laminar;
    return out;
  }
  if (auto s = match_semilaminar(inst)) {
    out.kind = InstanceKind::SemiLaminar;
    out.semilaminar = std::move(s);
    return out;
  }
  out.kind = InstanceKind::General;
  return out;
}

Instance build_semilaminar(const SemiLaminarLayout& layout) {
  const std::size_t regions = layout.region_parent.size();
  if (regions == 0 || layout.region_parent[0].has_value() || layout.num_topics == 0) {
    throw std::invalid_argument("semi-laminar layout needs a root region 0 and at least one topic");
  }
  std::vector<char> has_child(regions, 0);
  for (std::size_t r = 1; r < regions; ++r) {
    if (!layout.region_parent[r] || *layout.region_parent[r] >= regions) {
      throw std::invalid_argument("region " + std::to_string(r) + " has no valid parent");
    }
    has_child[*layout.region_parent[r]] = 1;
  }
  auto topic_name = [](std::size_t r, std::size_t t) {
    return "r" + std::to_string(r) + ":t" + std::to_string(t);
  };
  InstanceSpec spec;
  for (std::size_t r = 0; r < regions; ++r) {
    spec.nodes.push_back("r" + std::to_string(r) + ":*");
    for (std::size_t t = 0; t < layout.num_topics; ++t) spec.nodes.push_back(topic_name(r, t));
  }
  for (std::size_t r = 0; r < regions; ++r) {
    for (std::size_t t = 0; t < layout.num_topics; ++t) {
      spec.edges.emplace_back("r" + std::to_string(r) + ":*", topic_name(r, t));
    }
  }
  for (std::size_t r = 1; r < regions; ++r) {
    for (std::size_t t = 0; t < layout.num_topics; ++t) {
      spec.edges.emplace_back(topic_name(*layout.region_parent[r], t), topic_name(r, t));
    }
  }
  for (const auto& cls : layout.classes) {
    if (cls.region >= regions || has_child[cls.region]) {
      throw std::invalid_argument("classes must sign up in a leaf region");
    }
    InstanceSpec::ClassSpec cs;
    cs.size = cls.size;
    for (auto t : cls.topics) {
      if (t >= layout.num_topics) throw std::invalid_argument("topic out of range");
      cs.leaves.push_back(topic_name(cls.region, t));
    }
    spec.classes.push_back(std::move(cs));
  }
  return Instance::build(std::move(spec));
}

Instance iterative_impossibility_fixture(std::int64_t n, std::int64_t k) {
  if (n < 1 || k < 1) throw std::invalid_argument("fixture needs n >= 1 and k >= 1");
  InstanceSpec spec;
  spec.nodes.push_back("f");
  InstanceSpec::ClassSpec shared;
  shared.size = (2 * n - 1) * k;
  for (std::int64_t j = 1; j <= 2 * n; ++j) {
    const std::string leaf = "c" + std::to_string(j);
    spec.nodes.push_back(leaf);
    spec.edges.emplace_back("f", leaf);
    spec.classes.push_back({{leaf}, k});
    shared.leaves.push_back(leaf);
  }
  spec.classes.push_back(std::move(shared));
  return Instance::build(std::move(spec));
}

}  // namespace fedasm
