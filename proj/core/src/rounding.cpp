#include "fedasm/rounding.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace fedasm {

namespace mp = boost::multiprecision;

NotABihierarchy::NotABihierarchy(std::size_t a, std::size_t b)
    : RoundingError("constraint sets " + std::to_string(a) + " and " + std::to_string(b) +
                    " belong to the same group but are neither nested nor disjoint"),
      first(a),
      second(b) {}

namespace {

constexpr i128 kMaxFlow = i128{1} << 120;

i128 to_i128(const BigInt& v) {
  const BigInt limit = BigInt(1) << 126;
  if (v >= limit || v <= -limit) throw RoundingError("value too large for exact rounding");
  BigInt mag = v < 0 ? BigInt(-v) : v;
  const auto lo = static_cast<std::uint64_t>(mag & BigInt(std::numeric_limits<std::uint64_t>::max()));
  const auto hi = static_cast<std::uint64_t>(mag >> 64);
  i128 out = static_cast<i128>((static_cast<u128>(hi) << 64) | lo);
  return v < 0 ? -out : out;
}

/// Common denominator of all marginals and the marginals scaled by it.
struct Scaled {
  i128 scale = 1;
  std::vector<i128> values;
};

Scaled scale_marginals(std::span<const Rational> marginals) {
  BigInt den = 1;
  for (const Rational& p : marginals) {
    if (p < 0) throw RoundingError("negative marginal");
    den = mp::lcm(den, BigInt(mp::denominator(p)));
    if (den >= BigInt(1) << 62) throw RoundingError("marginal denominators too large");
  }
  Scaled out;
  out.scale = to_i128(den);
  i128 total = 0;
  for (const Rational& p : marginals) {
    BigInt v = mp::numerator(p) * (den / mp::denominator(p));
    out.values.push_back(to_i128(v));
    total += out.values.back();
    if (total >= kMaxFlow) throw RoundingError("marginal total too large for exact rounding");
  }
  return out;
}

i128 floor_div(i128 a, i128 d) { return a / d; }  // a >= 0
i128 frac(i128 a, i128 d) { return a % d; }

/// Probability split of one decomposition step: move +up with probability
/// down / (up + down), otherwise move -down. Keeps the expectation fixed.
bool choose_up(i128 up, i128 down, Rng& rng) {
  return static_cast<i128>(rng.below128(static_cast<u128>(up + down))) < down;
}

// ---------------------------------------------------------------------------
// Pairwise rounding under a fixed total.

template <class Visit>
void fixed_sum_steps(std::vector<i128>& x, i128 scale, Visit&& branch) {
  // branch(up, down) returns true to move the lower coordinate up.
  for (;;) {
    std::size_t i = x.size();
    std::size_t j = x.size();
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (frac(x[k], scale) == 0) continue;
      if (i == x.size()) {
        i = k;
      } else {
        j = k;
        break;
      }
    }
    if (j == x.size()) return;
    const i128 fi = frac(x[i], scale);
    const i128 fj = frac(x[j], scale);
    const i128 up = std::min(scale - fi, fj);
    const i128 down = std::min(fi, scale - fj);
    if (branch(up, down)) {
      x[i] += up;
      x[j] -= up;
    } else {
      x[i] -= down;
      x[j] += down;
    }
  }
}

std::vector<std::int64_t> unscale(const std::vector<i128>& x, i128 scale) {
  std::vector<std::int64_t> out;
  out.reserve(x.size());
  for (i128 v : x) out.push_back(static_cast<std::int64_t>(floor_div(v, scale)));
  return out;
}

// ---------------------------------------------------------------------------
// Bihierarchy network.
//
// Vertices: 0 = group-0 root, 1 = group-1 root, then one vertex per
// constraint. Arcs: one per coordinate (smallest group-0 set containing it to
// smallest group-1 set containing it), one per group-0 set (parent to set),
// one per group-1 set (set to parent) and one closing arc from the group-1
// root to the group-0 root carrying the total. Flow is conserved everywhere,
// so a vertex touching a fractional arc touches at least two.

struct Arc {
  std::size_t from;
  std::size_t to;
};

struct Network {
  std::vector<Arc> arcs;
  std::size_t num_vertices = 0;
  std::size_t num_coordinates = 0;
  // Arcs incident to each vertex, CSR layout.
  std::vector<std::size_t> incident_begin;
  std::vector<std::size_t> incident;

  void index_incidence() {
    incident_begin.assign(num_vertices + 1, 0);
    for (const Arc& a : arcs) {
      ++incident_begin[a.from + 1];
      ++incident_begin[a.to + 1];
    }
    for (std::size_t v = 0; v < num_vertices; ++v) incident_begin[v + 1] += incident_begin[v];
    incident.assign(incident_begin.back(), 0);
    std::vector<std::size_t> fill(incident_begin.begin(), incident_begin.end() - 1);
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      incident[fill[arcs[a].from]++] = a;
      incident[fill[arcs[a].to]++] = a;
    }
  }
};

struct CycleStep {
  std::vector<std::pair<std::size_t, int>> arcs;  // (arc, +1 along / -1 against)
  i128 up = 0;
  i128 down = 0;
};

bool is_subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool disjoint(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return false;
    if (*i < *j) ++i; else ++j;
  }
  return true;
}

std::vector<std::vector<std::size_t>> sorted_members(const RoundingProblem& problem) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(problem.constraints.size());
  for (const ConstraintSet& s : problem.constraints) {
    auto m = s.members;
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    for (std::size_t i : m) {
      if (i >= problem.marginals.size()) throw RoundingError("constraint member out of range");
    }
    if (s.group != 0 && s.group != 1) throw RoundingError("constraint group must be 0 or 1");
    out.push_back(std::move(m));
  }
  return out;
}

Network build_network(const RoundingProblem& problem) {
  const auto members = sorted_members(problem);
  const std::size_t k = problem.marginals.size();
  const std::size_t m = members.size();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      if (problem.constraints[a].group != problem.constraints[b].group) continue;
      if (is_subset(members[a], members[b]) || is_subset(members[b], members[a]) ||
          disjoint(members[a], members[b])) {
        continue;
      }
      throw NotABihierarchy(a, b);
    }
  }

  // Parent of each set: smallest strictly-containing set of its group, ties
  // on equal sets broken by index so equal sets form a chain.
  auto contains = [&](std::size_t outer, std::size_t inner) {
    if (members[outer].size() != members[inner].size()) {
      return members[outer].size() > members[inner].size() && is_subset(members[inner], members[outer]);
    }
    return outer < inner && members[outer] == members[inner];
  };
  auto vertex = [](std::size_t set) { return set + 2; };

  Network net;
  net.num_vertices = m + 2;
  net.num_coordinates = k;

  std::vector<std::size_t> parent(m);
  for (std::size_t s = 0; s < m; ++s) {
    const int g = problem.constraints[s].group;
    std::optional<std::size_t> best;
    for (std::size_t t = 0; t < m; ++t) {
      if (t == s || problem.constraints[t].group != g || !contains(t, s)) continue;
      if (!best || contains(*best, t)) best = t;
    }
    parent[s] = best ? vertex(*best) : static_cast<std::size_t>(g);
  }

  auto innermost = [&](std::size_t i, int g) {
    std::optional<std::size_t> best;
    for (std::size_t s = 0; s < m; ++s) {
      if (problem.constraints[s].group != g) continue;
      if (!std::binary_search(members[s].begin(), members[s].end(), i)) continue;
      if (!best || contains(*best, s)) best = s;
    }
    return best ? vertex(*best) : static_cast<std::size_t>(g);
  };

  for (std::size_t i = 0; i < k; ++i) net.arcs.push_back({innermost(i, 0), innermost(i, 1)});
  for (std::size_t s = 0; s < m; ++s) {
    if (problem.constraints[s].group == 0) {
      net.arcs.push_back({parent[s], vertex(s)});
    } else {
      net.arcs.push_back({vertex(s), parent[s]});
    }
  }
  net.arcs.push_back({1, 0});
  net.index_incidence();
  return net;
}

/// Initial flow: coordinates carry their marginals, set arcs their sums.
std::vector<i128> initial_flow(const RoundingProblem& problem, const Network& net,
                               const Scaled& scaled) {
  const auto members = sorted_members(problem);
  std::vector<i128> flow(net.arcs.size(), 0);
  i128 total = 0;
  for (std::size_t i = 0; i < net.num_coordinates; ++i) {
    flow[i] = scaled.values[i];
    total += scaled.values[i];
  }
  for (std::size_t s = 0; s < members.size(); ++s) {
    i128 sum = 0;
    for (std::size_t i : members[s]) sum += scaled.values[i];
    flow[net.num_coordinates + s] = sum;
  }
  flow.back() = total;
  return flow;
}

std::optional<CycleStep> find_cycle(const Network& net, const std::vector<i128>& flow, i128 scale) {
  std::size_t start = net.arcs.size();
  for (std::size_t a = 0; a < net.arcs.size(); ++a) {
    if (frac(flow[a], scale) != 0) {
      start = a;
      break;
    }
  }
  if (start == net.arcs.size()) return std::nullopt;

  // Walk along fractional arcs, taking the lowest-index one other than the
  // arc we arrived by, until a vertex repeats.
  std::vector<std::pair<std::size_t, int>> path;
  std::vector<std::size_t> position(net.num_vertices, std::numeric_limits<std::size_t>::max());
  position[net.arcs[start].from] = 0;
  path.push_back({start, +1});
  std::size_t at = net.arcs[start].to;
  std::size_t came = start;
  while (position[at] == std::numeric_limits<std::size_t>::max()) {
    position[at] = path.size();
    std::size_t next = net.arcs.size();
    for (std::size_t k = net.incident_begin[at]; k < net.incident_begin[at + 1]; ++k) {
      const std::size_t a = net.incident[k];
      if (a != came && frac(flow[a], scale) != 0 && a < next) next = a;
    }
    if (next == net.arcs.size()) throw RoundingError("flow conservation violated");
    const bool forward = net.arcs[next].from == at;
    path.push_back({next, forward ? +1 : -1});
    at = forward ? net.arcs[next].to : net.arcs[next].from;
    came = next;
  }

  CycleStep step;
  step.arcs.assign(path.begin() + static_cast<std::ptrdiff_t>(position[at]), path.end());
  step.up = scale;
  step.down = scale;
  for (auto [a, dir] : step.arcs) {
    const i128 f = frac(flow[a], scale);
    const i128 to_ceil = scale - f;
    step.up = std::min(step.up, dir > 0 ? to_ceil : f);
    step.down = std::min(step.down, dir > 0 ? f : to_ceil);
  }
  return step;
}

void apply(std::vector<i128>& flow, const CycleStep& step, bool up) {
  const i128 amount = up ? step.up : -step.down;
  for (auto [a, dir] : step.arcs) flow[a] += dir * amount;
}

std::vector<std::int64_t> coordinates(const Network& net, const std::vector<i128>& flow,
                                      i128 scale) {
  std::vector<std::int64_t> out(net.num_coordinates);
  for (std::size_t i = 0; i < net.num_coordinates; ++i) {
    out[i] = static_cast<std::int64_t>(floor_div(flow[i], scale));
  }
  return out;
}

Rational ratio(i128 num, i128 den) {
  auto big = [](i128 v) {
    BigInt hi = BigInt(static_cast<std::int64_t>(v >> 64));
    BigInt lo = BigInt(static_cast<std::uint64_t>(v & std::numeric_limits<std::uint64_t>::max()));
    return BigInt((hi << 64) + lo);
  };
  return Rational(big(num), big(den));
}

}  // namespace

std::int64_t round_single(const Rational& x, Rng& rng) {
  if (x < 0) throw RoundingError("negative marginal");
  const std::int64_t lo = floor_i64(x);
  const Rational f = x - lo;
  if (f == 0) return lo;
  const Scaled s = scale_marginals(std::span<const Rational>(&f, 1));
  return static_cast<i128>(rng.below128(static_cast<u128>(s.scale))) < s.values[0] ? lo + 1 : lo;
}

PreparedFixedSum::PreparedFixedSum(std::span<const Rational> marginals,
                                   std::span<const std::int64_t> lower_bounds) {
  if (!lower_bounds.empty() && lower_bounds.size() != marginals.size()) {
    throw RoundingError("lower bound count does not match marginal count");
  }
  Scaled s = scale_marginals(marginals);
  i128 total = 0;
  for (i128 v : s.values) total += v;
  if (frac(total, s.scale) != 0) throw RoundingError("marginals do not sum to an integer");
  for (std::size_t i = 0; i < lower_bounds.size(); ++i) {
    if (lower_bounds[i] > floor_div(s.values[i], s.scale)) {
      throw RoundingError("lower bound exceeds floor of marginal " + std::to_string(i));
    }
  }
  scale_ = s.scale;
  values_ = std::move(s.values);
}

std::vector<std::int64_t> PreparedFixedSum::operator()(Rng& rng) const {
  std::vector<i128> x = values_;
  fixed_sum_steps(x, scale_, [&](i128 up, i128 down) { return choose_up(up, down, rng); });
  return unscale(x, scale_);
}

std::vector<std::int64_t> round_fixed_sum(std::span<const Rational> marginals,
                                          std::span<const std::int64_t> lower_bounds, Rng& rng) {
  return PreparedFixedSum(marginals, lower_bounds)(rng);
}

void check_bihierarchy(const RoundingProblem& problem) { (void)build_network(problem); }

struct PreparedRounding::State {
  Network net;
  i128 scale = 1;
  std::vector<i128> flow;
};

PreparedRounding::PreparedRounding(const RoundingProblem& problem) {
  auto state = std::make_shared<State>();
  state->net = build_network(problem);
  const Scaled s = scale_marginals(problem.marginals);
  state->scale = s.scale;
  state->flow = initial_flow(problem, state->net, s);
  state_ = std::move(state);
}

std::vector<std::int64_t> PreparedRounding::operator()(Rng& rng) const {
  std::vector<i128> flow = state_->flow;
  while (auto step = find_cycle(state_->net, flow, state_->scale)) {
    apply(flow, *step, choose_up(step->up, step->down, rng));
  }
  return coordinates(state_->net, flow, state_->scale);
}

std::vector<std::int64_t> round_bihierarchy(const RoundingProblem& problem, Rng& rng) {
  return PreparedRounding(problem)(rng);
}

OutcomeDistribution exact_outcome_distribution(const RoundingProblem& problem,
                                               std::size_t max_dimension) {
  if (problem.marginals.size() > max_dimension) {
    throw RoundingError("dimension too large for exact enumeration");
  }
  const Network net = build_network(problem);
  const Scaled s = scale_marginals(problem.marginals);
  using State = std::vector<i128>;
  std::map<State, OutcomeDistribution> memo;
  std::function<OutcomeDistribution(const State&)> expand = [&](const State& flow) {
    if (auto it = memo.find(flow); it != memo.end()) return it->second;
    OutcomeDistribution out;
    if (auto cycle = find_cycle(net, flow, s.scale)) {
      const Rational p_up = ratio(cycle->down, cycle->up + cycle->down);
      State up = flow;
      State down = flow;
      apply(up, *cycle, true);
      apply(down, *cycle, false);
      for (auto& [x, p] : expand(up)) out[x] += p * p_up;
      for (auto& [x, p] : expand(down)) out[x] += p * (1 - p_up);
    } else {
      out[coordinates(net, flow, s.scale)] = 1;
    }
    memo.emplace(flow, out);
    return out;
  };
  return expand(initial_flow(problem, net, s));
}

OutcomeDistribution exact_fixed_sum_distribution(std::span<const Rational> marginals,
                                                 std::size_t max_dimension) {
  if (marginals.size() > max_dimension) {
    throw RoundingError("dimension too large for exact enumeration");
  }
  const Scaled s = scale_marginals(marginals);
  i128 total = 0;
  for (i128 v : s.values) total += v;
  if (frac(total, s.scale) != 0) throw RoundingError("marginals do not sum to an integer");
  using State = std::vector<i128>;
  std::map<State, OutcomeDistribution> memo;
  std::function<OutcomeDistribution(const State&)> expand = [&](const State& x) {
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    std::size_t i = x.size();
    std::size_t j = x.size();
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (frac(x[k], s.scale) == 0) continue;
      if (i == x.size()) {
        i = k;
      } else {
        j = k;
        break;
      }
    }
    OutcomeDistribution out;
    if (j == x.size()) {
      out[unscale(x, s.scale)] = 1;
    } else {
      const i128 fi = frac(x[i], s.scale);
      const i128 fj = frac(x[j], s.scale);
      const i128 up = std::min(s.scale - fi, fj);
      const i128 down = std::min(fi, s.scale - fj);
      const Rational p_up = ratio(down, up + down);
      State a = x;
      a[i] += up;
      a[j] -= up;
      State b = x;
      b[i] -= down;
      b[j] += down;
      for (auto& [v, p] : expand(a)) out[v] += p * p_up;
      for (auto& [v, p] : expand(b)) out[v] += p * (1 - p_up);
    }
    memo.emplace(x, out);
    return out;
  };
  return expand(s.values);
}

bool satisfies_constraints(const RoundingProblem& problem, std::span<const std::int64_t> x) {
  if (x.size() != problem.marginals.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < floor_i64(problem.marginals[i]) || x[i] > ceil_i64(problem.marginals[i])) return false;
  }
  const auto members = sorted_members(problem);
  for (std::size_t s = 0; s < members.size(); ++s) {
    Rational target = 0;
    std::int64_t sum = 0;
    for (std::size_t i : members[s]) {
      target += problem.marginals[i];
      sum += x[i];
    }
    const auto side = static_cast<unsigned>(problem.constraints[s].side);
    if ((side & static_cast<unsigned>(Side::Floor)) && sum < floor_i64(target)) return false;
    if ((side & static_cast<unsigned>(Side::Ceiling)) && sum > ceil_i64(target)) return false;
  }
  return true;
}

}  // namespace fedasm
