#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fedasm::oracle {

namespace {

std::vector<std::string> children_of(const InstanceSpec& spec, const std::string& node) {
  std::vector<std::string> out;
  for (const auto& [p, c] : spec.edges) {
    if (p == node) out.push_back(c);
  }
  return out;
}

bool meets(const std::vector<std::string>& class_leaves, const std::set<std::string>& leaves) {
  return std::any_of(class_leaves.begin(), class_leaves.end(),
                     [&](const std::string& l) { return leaves.count(l) > 0; });
}

}  // namespace

std::set<std::string> leaves_below(const InstanceSpec& spec, const std::string& node) {
  std::set<std::string> out;
  std::function<void(const std::string&)> walk = [&](const std::string& v) {
    const auto kids = children_of(spec, v);
    if (kids.empty()) out.insert(v);
    for (const auto& k : kids) walk(k);
  };
  walk(node);
  return out;
}

std::vector<std::size_t> classes_in(const InstanceSpec& spec, const std::string& node) {
  const auto leaves = leaves_below(spec, node);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < spec.classes.size(); ++i) {
    if (meets(spec.classes[i].leaves, leaves)) out.push_back(i);
  }
  return out;
}

std::int64_t population(const InstanceSpec& spec, const std::string& node) {
  std::int64_t total = 0;
  for (std::size_t i : classes_in(spec, node)) total += spec.classes[i].size;
  return total;
}

Rational weighted_population(const InstanceSpec& spec, const std::string& f, const std::string& c) {
  const auto kids = children_of(spec, f);
  Rational total = 0;
  for (std::size_t i : classes_in(spec, c)) {
    std::int64_t m = 0;
    for (const auto& k : kids) m += meets(spec.classes[i].leaves, leaves_below(spec, k)) ? 1 : 0;
    total += make_rational(spec.classes[i].size, m);
  }
  return total;
}

Rational quota(const InstanceSpec& spec, const std::string& f, const std::string& c) {
  return weighted_population(spec, f, c) / population(spec, f);
}

std::map<std::pair<std::string, std::string>, std::int64_t> overlap_floors(const InstanceSpec& spec,
                                                                           std::int64_t n) {
  std::map<std::pair<std::string, std::string>, std::int64_t> out;
  for (const auto& [p, c] : spec.edges) out[{p, c}] = floor_i64(make_rational(n) * quota(spec, p, c));
  return out;
}

std::int64_t ex_post_violations(const Instance& inst, const AssemblyAssignment& a, std::int64_t n,
                                const std::map<std::pair<std::string, std::string>, std::int64_t>& slack) {
  const InstanceSpec& spec = inst.spec();
  std::int64_t violations = 0;
  std::map<std::string, std::set<std::pair<std::size_t, std::int64_t>>> sets;
  for (std::size_t v = 0; v < spec.nodes.size(); ++v) {
    const std::string& name = spec.nodes[v];
    const NodeId id = inst.at(name);
    const auto& members = a.assemblies.at(idx(id));
    if (static_cast<std::int64_t>(members.size()) != n) ++violations;
    const auto allowed = classes_in(spec, name);
    auto& set = sets[name];
    for (const Member& m : members) {
      const std::size_t cls = idx(m.cls);
      const bool ok = std::find(allowed.begin(), allowed.end(), cls) != allowed.end() && m.index >= 0 &&
                      m.index < spec.classes[cls].size;
      if (!ok) ++violations;
      if (!set.insert({cls, m.index}).second) ++violations;
    }
  }
  for (const std::string& f : spec.nodes) {
    const auto kids = children_of(spec, f);
    if (kids.empty()) continue;
    for (const auto& person : sets[f]) {
      bool found = false;
      for (const auto& k : kids) found = found || sets[k].count(person) > 0;
      if (!found) {
        ++violations;
        break;
      }
    }
  }
  for (const auto& [edge, floor] : overlap_floors(spec, n)) {
    std::int64_t overlap = 0;
    for (const auto& person : sets[edge.first]) overlap += sets[edge.second].count(person);
    const auto it = slack.find(edge);
    if (overlap < floor - (it == slack.end() ? 0 : it->second)) ++violations;
  }
  return violations;
}

std::vector<CanonicalAssignment> enumerate_canonical(const Instance& inst, std::int64_t n) {
  const InstanceSpec& spec = inst.spec();
  const std::size_t nodes = spec.nodes.size();
  const std::size_t classes = spec.classes.size();
  const auto floors = overlap_floors(spec, n);
  std::vector<std::vector<std::size_t>> allowed(nodes);
  for (std::size_t v = 0; v < nodes; ++v) allowed[v] = classes_in(spec, spec.nodes[v]);

  // All count vectors for one node: compositions of n over its classes.
  auto compositions = [&](std::size_t v) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> row(classes, 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t k, std::int64_t left) {
      if (k == allowed[v].size()) {
        if (left == 0) out.push_back(row);
        return;
      }
      const std::size_t c = allowed[v][k];
      for (std::int64_t x = 0; x <= std::min(left, spec.classes[c].size); ++x) {
        row[c] = x;
        rec(k + 1, left - x);
      }
      row[c] = 0;
    };
    rec(0, n);
    return out;
  };
  std::vector<std::vector<std::vector<std::int64_t>>> options(nodes);
  for (std::size_t v = 0; v < nodes; ++v) options[v] = compositions(v);

  std::vector<CanonicalAssignment> out;
  CanonicalAssignment current;
  current.n = n;
  current.counts.assign(nodes, std::vector<std::int64_t>(classes, 0));
  std::function<void(std::size_t)> rec = [&](std::size_t v) {
    if (v == nodes) {
      for (std::size_t f = 0; f < nodes; ++f) {
        const auto kids = children_of(spec, spec.nodes[f]);
        if (kids.empty()) continue;
        for (std::size_t c = 0; c < classes; ++c) {
          std::int64_t best = 0;
          for (const auto& k : kids) {
            const std::size_t kv = idx(inst.at(k));
            best = std::max(best, current.counts[kv][c]);
          }
          if (current.counts[f][c] > best) return;
        }
        for (const auto& k : kids) {
          const std::size_t kv = idx(inst.at(k));
          std::int64_t overlap = 0;
          for (std::size_t c = 0; c < classes; ++c) overlap += std::min(current.counts[f][c], current.counts[kv][c]);
          if (overlap < floors.at({spec.nodes[f], k})) return;
        }
      }
      out.push_back(current);
      return;
    }
    const std::size_t node = idx(inst.at(spec.nodes[v]));
    for (const auto& row : options[v]) {
      current.counts[node] = row;
      rec(v + 1);
    }
    current.counts[node].assign(classes, 0);
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

double binomial_band(double p, std::int64_t trials, double sigmas) {
  return sigmas * std::sqrt(p * (1 - p) / static_cast<double>(trials));
}

}  // namespace fedasm::oracle
