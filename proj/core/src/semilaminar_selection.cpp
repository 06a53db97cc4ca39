#include "fedasm/semilaminar_selection.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "fedasm/laminar_selection.hpp"
#include "fedasm/rounding.hpp"

namespace fedasm {

namespace {

const SemiLaminarStructure& require_structure(const Classification& cls) {
  if (cls.kind != InstanceKind::SemiLaminar || !cls.semilaminar) {
    throw PreconditionError(std::string("semi-laminar selection requires a semi-laminar instance; this one is ") +
                            to_string(cls.kind));
  }
  return *cls.semilaminar;
}

Rational topic_weight(const Instance& inst, const SemiLaminarStructure& st, std::size_t r,
                      std::size_t t) {
  return weighted_population(inst, st.star[r], st.topic_node[r][t]);
}

/// The j-th member index of [0, size) that is not in `excluded` (sorted).
std::int64_t skip_excluded(std::int64_t j, const std::vector<std::int64_t>& excluded) {
  for (std::int64_t x : excluded) {
    if (x > j) break;
    ++j;
  }
  return j;
}

}  // namespace

RegularityReport check_regularity(const Instance& inst, std::int64_t n) {
  const Classification cls = classify(inst);
  const SemiLaminarStructure& st = require_structure(cls);
  RegularityReport report;
  report.epsilon = Rational(1, 2);
  report.delta = 1;
  for (std::size_t r = 0; r < st.num_regions(); ++r) {
    for (std::size_t t = 0; t < st.num_topics; ++t) {
      const Rational share = topic_weight(inst, st, r, t) / inst.population(st.topic_node[r][t]);
      report.epsilon = std::min({report.epsilon, share, Rational(1 - share)});
    }
  }
  for (const Edge& e : inst.edges()) {
    report.delta = std::min(report.delta, Rational(1 - make_rational(inst.population(e.child), inst.population(e.parent))));
  }
  const Rational product = report.epsilon * report.delta;
  if (product <= 0) {
    report.failures.push_back("epsilon * delta is zero");
  } else if (make_rational(n) < Rational(2) / product) {
    report.failures.push_back("n = " + std::to_string(n) + " is below 2 / (epsilon delta) = " +
                              to_string(Rational(Rational(2) / product)));
  }
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (inst.population(node_id(v)) < 4 * n) {
      report.failures.push_back("node '" + inst.name(node_id(v)) + "' has fewer than 4n members");
    }
  }
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    if (inst.class_size(class_id(c)) < 2) {
      report.failures.push_back("class " + std::to_string(c) + " has fewer than 2 members");
    }
  }
  report.satisfied = report.failures.empty();
  return report;
}

namespace {

/// Everything sample_leaves needs that does not depend on the random draws.
struct LeafPlan {
  std::optional<PreparedRounding> alpha;
  std::vector<std::vector<std::size_t>> coord;  // [class][position of topic] -> coordinate
  struct Topic {
    std::vector<std::pair<std::size_t, std::size_t>> members;  // (class, position of topic)
    std::optional<PreparedFixedSum> beta;
  };
  std::vector<Topic> topics;
};

LeafPlan plan_leaves(std::span<const LeafClass> classes, std::span<const std::int64_t> s, std::int64_t n) {
  const std::size_t topics = s.size();
  LeafPlan plan;

  // Selectable seats: coordinate per (class, topic of that class).
  std::vector<Rational> sel_mass(topics, 0);
  for (const LeafClass& c : classes) {
    for (std::size_t t : c.topics) sel_mass[t] += make_rational(c.size, static_cast<std::int64_t>(c.topics.size()));
  }
  RoundingProblem alpha_problem;
  plan.coord.resize(classes.size());
  std::vector<ConstraintSet> per_topic(topics, ConstraintSet{{}, 0, Side::Both});
  for (std::size_t k = 0; k < classes.size(); ++k) {
    ConstraintSet per_class{{}, 1, Side::Ceiling};
    for (std::size_t t : classes[k].topics) {
      if (sel_mass[t] == 0) throw SamplingInfeasible("topic without members in leaf region");
      const Rational share = make_rational(classes[k].size, static_cast<std::int64_t>(classes[k].topics.size()));
      plan.coord[k].push_back(alpha_problem.marginals.size());
      per_topic[t].members.push_back(alpha_problem.marginals.size());
      per_class.members.push_back(alpha_problem.marginals.size());
      alpha_problem.marginals.push_back(share / sel_mass[t] * s[t]);
    }
    alpha_problem.constraints.push_back(std::move(per_class));
  }
  for (auto& c : per_topic) alpha_problem.constraints.push_back(std::move(c));
  plan.alpha.emplace(alpha_problem);

  // Unselectable seats, one fixed-sum rounding per topic.
  plan.topics.resize(topics);
  for (std::size_t t = 0; t < topics; ++t) {
    std::vector<Rational> mass;
    Rational total = 0;
    for (std::size_t k = 0; k < classes.size(); ++k) {
      auto it = std::find(classes[k].topics.begin(), classes[k].topics.end(), t);
      if (it == classes[k].topics.end()) continue;
      const auto arity = static_cast<std::int64_t>(classes[k].topics.size());
      plan.topics[t].members.push_back({k, static_cast<std::size_t>(it - classes[k].topics.begin())});
      mass.push_back(make_rational(classes[k].size) * make_rational(arity - 1, arity));
      total += mass.back();
    }
    const std::int64_t seats = n - s[t];
    if (seats < 0) throw SamplingInfeasible("more selectable seats than the assembly size");
    if (total == 0) {
      if (seats > 0) throw SamplingInfeasible("no multi-topic members to fill unselectable seats");
      continue;
    }
    std::vector<Rational> q;
    for (const Rational& m : mass) q.push_back(m / total * seats);
    plan.topics[t].beta.emplace(q, std::span<const std::int64_t>{});
  }
  return plan;
}

std::vector<TopicSets> run_leaves(const LeafPlan& plan, std::span<const LeafClass> classes, Rng& rng) {
  const std::vector<std::int64_t> alpha = (*plan.alpha)(rng);
  std::vector<TopicSets> out(plan.topics.size());
  // D^T_t: consecutive blocks of one permutation of the class.
  std::vector<std::vector<std::vector<std::int64_t>>> taken(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    std::int64_t total = 0;
    for (std::size_t i : plan.coord[k]) total += alpha[i];
    if (total > classes[k].size) throw SamplingInfeasible("selectable seats exceed class size");
    const auto perm = sample_ordered(classes[k].size, total, rng);
    std::size_t pos = 0;
    taken[k].resize(classes[k].topics.size());
    for (std::size_t a = 0; a < classes[k].topics.size(); ++a) {
      const std::size_t t = classes[k].topics[a];
      for (std::int64_t j = 0; j < alpha[plan.coord[k][a]]; ++j) {
        out[t].sel.push_back({classes[k].cls, perm[pos]});
        taken[k][a].push_back(perm[pos]);
        ++pos;
      }
      std::sort(taken[k][a].begin(), taken[k][a].end());
    }
  }
  for (std::size_t t = 0; t < plan.topics.size(); ++t) {
    const auto& topic = plan.topics[t];
    if (!topic.beta) continue;
    const std::vector<std::int64_t> beta = (*topic.beta)(rng);
    for (std::size_t i = 0; i < topic.members.size(); ++i) {
      const auto [k, a] = topic.members[i];
      const auto& excluded = taken[k][a];
      const std::int64_t available = classes[k].size - static_cast<std::int64_t>(excluded.size());
      if (beta[i] > available) throw SamplingInfeasible("unselectable seats exceed available members");
      for (std::int64_t j : sample_ordered(available, beta[i], rng)) {
        out[t].uns.push_back({classes[k].cls, skip_excluded(j, excluded)});
      }
    }
  }
  return out;
}

/// Joint rounding of (x^sel_c, x^uns_c): coordinates 2c and 2c + 1.
PreparedRounding plan_children(std::int64_t s, std::int64_t n, std::span<const Rational> weights,
                               std::span<const std::int64_t> populations) {
  Rational w_total = 0;
  Rational rest_total = 0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    w_total += weights[c];
    rest_total += make_rational(populations[c]) - weights[c];
  }
  if (w_total <= 0 || (rest_total <= 0 && n - s > 0)) {
    throw SamplingInfeasible("degenerate child weights");
  }
  RoundingProblem problem;
  ConstraintSet all_sel{{}, 0, Side::Both};
  ConstraintSet all_uns{{}, 0, Side::Both};
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const Rational x_sel = weights[c] / w_total * s;
    const Rational x_uns = rest_total > 0
                               ? Rational((make_rational(populations[c]) - weights[c]) / rest_total * (n - s))
                               : Rational(0);
    all_sel.members.push_back(problem.marginals.size());
    problem.marginals.push_back(x_sel);
    all_uns.members.push_back(problem.marginals.size());
    problem.marginals.push_back(x_uns);
    problem.constraints.push_back({{2 * c, 2 * c + 1}, 1, Side::Floor});
  }
  problem.constraints.push_back(std::move(all_sel));
  problem.constraints.push_back(std::move(all_uns));
  return PreparedRounding(problem);
}

ChildSample run_children(const PreparedRounding& plan, std::span<const ChildSets> children, Rng& rng) {
  const std::vector<std::int64_t> gamma = plan(rng);
  ChildSample out;
  for (std::size_t c = 0; c < children.size(); ++c) {
    out.gamma_sel.push_back(gamma[2 * c]);
    out.gamma_uns.push_back(gamma[2 * c + 1]);
    auto sel = sample_members(children[c].sel, gamma[2 * c], rng);
    auto uns = sample_members(children[c].uns, gamma[2 * c + 1], rng);
    out.sets.sel.insert(out.sets.sel.end(), sel.begin(), sel.end());
    out.sets.uns.insert(out.sets.uns.end(), uns.begin(), uns.end());
  }
  return out;
}

PreparedFixedSum plan_round_and_sample(std::int64_t size, std::span<const Rational> weights) {
  Rational total = 0;
  for (const Rational& w : weights) total += w;
  if (total <= 0) throw SamplingInfeasible("weights sum to zero");
  std::vector<Rational> y;
  std::vector<std::int64_t> floors;
  for (const Rational& w : weights) {
    y.push_back(w / total * size);
    floors.push_back(floor_i64(y.back()));
  }
  return PreparedFixedSum(y, floors);
}

std::vector<Member> run_round_and_sample(const PreparedFixedSum& plan, std::span<const WeightedSet> sets,
                                         Rng& rng) {
  const std::vector<std::int64_t> gamma = plan(rng);
  std::vector<Member> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto part = sample_members(sets[i].members, gamma[i], rng);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace

std::vector<TopicSets> sample_leaves(std::span<const LeafClass> classes,
                                     std::span<const std::int64_t> s, std::int64_t n, Rng& rng) {
  return run_leaves(plan_leaves(classes, s, n), classes, rng);
}

ChildSample sample_from_children(std::int64_t s, std::int64_t n, std::span<const ChildSets> children,
                                 Rng& rng) {
  std::vector<Rational> weights;
  std::vector<std::int64_t> populations;
  for (const ChildSets& c : children) {
    weights.push_back(c.weight);
    populations.push_back(c.population);
  }
  return run_children(plan_children(s, n, weights, populations), children, rng);
}

std::vector<Member> round_and_sample(std::int64_t size, std::span<const WeightedSet> sets, Rng& rng) {
  std::vector<Rational> weights;
  for (const WeightedSet& s : sets) weights.push_back(s.weight);
  return run_round_and_sample(plan_round_and_sample(size, weights), sets, rng);
}

struct SemiLaminarSelector::State {
  const Instance* inst = nullptr;
  std::int64_t n = 0;
  SemiLaminarStructure st;
  std::vector<std::size_t> bottom_up;
  std::vector<std::vector<Rational>> w;                 // [r][t]
  std::vector<std::vector<PreparedRounding>> s_round;   // [r][t], one coordinate each
  std::vector<std::vector<LeafClass>> leaf_classes;     // [r]
  std::vector<std::optional<PreparedFixedSum>> star;    // [r]

  std::mutex mutex;
  std::vector<std::map<std::vector<std::int64_t>, std::shared_ptr<const LeafPlan>>> leaf_plans;
  std::vector<std::vector<std::map<std::int64_t, std::shared_ptr<const PreparedRounding>>>> child_plans;

  std::shared_ptr<const LeafPlan> leaf_plan(std::size_t r, const std::vector<std::int64_t>& s) {
    std::lock_guard lock(mutex);
    auto& slot = leaf_plans[r][s];
    if (!slot) slot = std::make_shared<const LeafPlan>(plan_leaves(leaf_classes[r], s, n));
    return slot;
  }

  std::shared_ptr<const PreparedRounding> child_plan(std::size_t r, std::size_t t, std::int64_t s) {
    std::lock_guard lock(mutex);
    auto& slot = child_plans[r][t][s];
    if (!slot) {
      std::vector<Rational> weights;
      std::vector<std::int64_t> populations;
      for (std::size_t c : st.region_children[r]) {
        weights.push_back(w[c][t]);
        populations.push_back(inst->population(st.topic_node[c][t]));
      }
      slot = std::make_shared<const PreparedRounding>(plan_children(s, n, weights, populations));
    }
    return slot;
  }
};

SemiLaminarSelector::SemiLaminarSelector(const Instance& inst, std::int64_t n)
    : state_(std::make_shared<State>()) {
  const Classification cls = classify(inst);
  State& state = *state_;
  state.st = require_structure(cls);
  const RegularityReport regularity = check_regularity(inst, n);
  if (!regularity.satisfied) {
    std::string reasons;
    for (const auto& f : regularity.failures) reasons += (reasons.empty() ? "" : "; ") + f;
    throw PreconditionError("instance is not regular enough for semi-laminar selection: " + reasons);
  }
  const SemiLaminarStructure& st = state.st;
  const std::size_t regions = st.num_regions();
  const std::size_t topics = st.num_topics;
  state.inst = &inst;
  state.n = n;
  state.bottom_up = st.regions_bottom_up();
  state.w.assign(regions, std::vector<Rational>(topics));
  state.s_round.resize(regions);
  state.leaf_classes.resize(regions);
  state.star.resize(regions);
  state.leaf_plans.resize(regions);
  state.child_plans.assign(regions, std::vector<std::map<std::int64_t, std::shared_ptr<const PreparedRounding>>>(topics));
  for (std::size_t r = 0; r < regions; ++r) {
    for (std::size_t t = 0; t < topics; ++t) {
      state.w[r][t] = topic_weight(inst, st, r, t);
      RoundingProblem single;
      single.marginals.push_back(make_rational(n) * state.w[r][t] / inst.population(st.topic_node[r][t]));
      state.s_round[r].emplace_back(single);
    }
    state.star[r].emplace(plan_round_and_sample(n, state.w[r]));
  }
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    state.leaf_classes[st.class_region[c]].push_back(
        {class_id(c), inst.class_size(class_id(c)), st.class_topics[c]});
  }
}

const SemiLaminarStructure& SemiLaminarSelector::structure() const { return state_->st; }

SemiLaminarDraw SemiLaminarSelector::draw(Rng& rng) const {
  State& state = *state_;
  const Instance& inst = *state.inst;
  const SemiLaminarStructure& st = state.st;
  const std::size_t regions = st.num_regions();
  const std::size_t topics = st.num_topics;
  SemiLaminarDraw draw;
  TopicPartition& part = draw.partition;
  part.s.assign(regions, std::vector<std::int64_t>(topics));
  part.sets.assign(regions, std::vector<TopicSets>(topics));
  for (std::size_t r = 0; r < regions; ++r) {
    for (std::size_t t = 0; t < topics; ++t) part.s[r][t] = state.s_round[r][t](rng)[0];
  }

  for (std::size_t r : state.bottom_up) {
    if (st.is_leaf_region(r)) {
      auto sets = run_leaves(*state.leaf_plan(r, part.s[r]), state.leaf_classes[r], rng);
      for (std::size_t t = 0; t < topics; ++t) part.sets[r][t] = std::move(sets[t]);
      continue;
    }
    for (std::size_t t = 0; t < topics; ++t) {
      std::vector<ChildSets> children;
      for (std::size_t c : st.region_children[r]) {
        children.push_back({part.sets[c][t].sel, part.sets[c][t].uns, state.w[c][t],
                            inst.population(st.topic_node[c][t])});
      }
      part.sets[r][t] = run_children(*state.child_plan(r, t, part.s[r][t]), children, rng).sets;
    }
  }

  draw.assignment.n = state.n;
  draw.assignment.assemblies.assign(inst.num_nodes(), {});
  for (std::size_t r = 0; r < regions; ++r) {
    std::vector<WeightedSet> selectable;
    for (std::size_t t = 0; t < topics; ++t) {
      auto& a = draw.assignment.assemblies[idx(st.topic_node[r][t])];
      a = part.sets[r][t].sel;
      a.insert(a.end(), part.sets[r][t].uns.begin(), part.sets[r][t].uns.end());
      selectable.push_back({part.sets[r][t].sel, state.w[r][t]});
    }
    draw.assignment.assemblies[idx(st.star[r])] = run_round_and_sample(*state.star[r], selectable, rng);
  }
  return draw;
}

SemiLaminarDraw select_semilaminar_detailed(const Instance& inst, std::int64_t n, Rng& rng) {
  return SemiLaminarSelector(inst, n).draw(rng);
}

AssemblyAssignment select_semilaminar(const Instance& inst, std::int64_t n, Rng& rng) {
  return select_semilaminar_detailed(inst, n, rng).assignment;
}

std::vector<std::int64_t> semilaminar_slack(const Instance& inst, const SemiLaminarStructure& st) {
  std::vector<char> is_star(inst.num_nodes(), 0);
  for (NodeId s : st.star) is_star[idx(s)] = 1;
  std::vector<std::int64_t> out;
  for (const Edge& e : inst.edges()) out.push_back(is_star[idx(e.parent)] ? 0 : 1);
  return out;
}

}  // namespace fedasm
