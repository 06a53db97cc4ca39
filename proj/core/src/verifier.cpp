#include "fedasm/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace fedasm {

std::vector<ExPostViolation> check_ex_post(const Instance& inst, const AssemblyAssignment& a,
                                           std::int64_t n, std::span<const std::int64_t> slack,
                                           std::int64_t draw) {
  std::vector<ExPostViolation> out;
  const std::size_t nodes = inst.num_nodes();
  std::vector<std::vector<Member>> sorted(nodes);
  for (std::size_t v = 0; v < nodes; ++v) {
    if (v < a.assemblies.size()) sorted[v] = a.assemblies[v];
    std::sort(sorted[v].begin(), sorted[v].end());
  }
  for (std::size_t v = 0; v < nodes; ++v) {
    const NodeId node = node_id(v);
    const std::string& name = inst.name(node);
    const auto& members = sorted[v];
    if (static_cast<std::int64_t>(members.size()) != n) {
      out.push_back({draw, "size:" + name, static_cast<std::int64_t>(members.size()), n});
    }
    std::int64_t invalid = 0;
    for (const Member& m : members) {
      if (idx(m.cls) >= inst.num_classes() || !inst.contains(node, m.cls) || m.index < 0 ||
          m.index >= inst.class_size(m.cls)) {
        ++invalid;
      }
    }
    if (invalid > 0) out.push_back({draw, "member:" + name, invalid, 0});
    std::int64_t duplicates = 0;
    for (std::size_t i = 1; i < members.size(); ++i) duplicates += members[i] == members[i - 1];
    if (duplicates > 0) out.push_back({draw, "duplicate:" + name, duplicates, 0});
    if (!inst.is_leaf(node)) {
      std::int64_t orphans = 0;
      for (const Member& m : members) {
        bool found = false;
        for (NodeId c : inst.children(node)) {
          const auto& pool = sorted[idx(c)];
          if (std::binary_search(pool.begin(), pool.end(), m)) {
            found = true;
            break;
          }
        }
        orphans += !found;
      }
      if (orphans > 0) out.push_back({draw, "inheritance:" + name, orphans, 0});
    }
  }
  const auto floors = overlap_floors(inst, n);
  const auto edges = inst.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& p = sorted[idx(edges[e].parent)];
    const auto& c = sorted[idx(edges[e].child)];
    std::vector<Member> both;
    std::set_intersection(p.begin(), p.end(), c.begin(), c.end(), std::back_inserter(both));
    const std::int64_t required = floors[e] - (e < slack.size() ? slack[e] : 0);
    const auto observed = static_cast<std::int64_t>(both.size());
    if (observed < required) {
      out.push_back({draw, "overlap:" + inst.name(edges[e].parent) + "->" + inst.name(edges[e].child),
                     observed, required});
    }
  }
  return out;
}

namespace {

struct Accumulator {
  std::vector<std::int64_t> seat_sum;
  std::vector<std::int64_t> seat_sumsq;
  std::vector<std::int64_t> person_hits;
  std::vector<std::int64_t> overlap_sum;
  std::vector<std::int64_t> overlap_sumsq;
  std::int64_t successes = 0;
  std::int64_t failures = 0;
  std::int64_t violation_count = 0;
  std::vector<ExPostViolation> violations;

  void merge(const Accumulator& o) {
    auto add = [](std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(seat_sum, o.seat_sum);
    add(seat_sumsq, o.seat_sumsq);
    add(person_hits, o.person_hits);
    add(overlap_sum, o.overlap_sum);
    add(overlap_sumsq, o.overlap_sumsq);
    successes += o.successes;
    failures += o.failures;
    violation_count += o.violation_count;
    violations.insert(violations.end(), o.violations.begin(), o.violations.end());
  }
};

struct Layout {
  std::vector<std::size_t> offset;  // first seat key of each node
  std::vector<std::pair<NodeId, ClassId>> keys;
  std::vector<std::pair<std::size_t, Member>> tracked;  // (seat key, member)

  Layout(const Instance& inst) {
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      offset.push_back(keys.size());
      for (ClassId c : inst.classes_of(node_id(v))) {
        const std::size_t key = keys.size();
        keys.emplace_back(node_id(v), c);
        tracked.push_back({key, Member{c, 0}});
        if (inst.class_size(c) > 1) tracked.push_back({key, Member{c, inst.class_size(c) - 1}});
      }
    }
  }

  std::optional<std::size_t> key(const Instance& inst, std::size_t v, ClassId c) const {
    const auto cls = inst.classes_of(node_id(v));
    auto it = std::lower_bound(cls.begin(), cls.end(), c);
    if (it == cls.end() || *it != c) return std::nullopt;
    return offset[v] + static_cast<std::size_t>(it - cls.begin());
  }
};

void run_trials(const Selector& selector, const Instance& inst, std::int64_t n,
                const MonteCarloOptions& options, const Layout& layout, std::int64_t begin,
                std::int64_t end, Accumulator& acc) {
  const std::size_t nodes = inst.num_nodes();
  const auto edges = inst.edges();
  acc.seat_sum.assign(layout.keys.size(), 0);
  acc.seat_sumsq.assign(layout.keys.size(), 0);
  acc.person_hits.assign(layout.tracked.size(), 0);
  acc.overlap_sum.assign(edges.size(), 0);
  acc.overlap_sumsq.assign(edges.size(), 0);
  std::vector<std::int64_t> seats(layout.keys.size());
  std::vector<std::vector<Member>> sorted(nodes);
  for (std::int64_t trial = begin; trial < end; ++trial) {
    Rng rng = Rng::for_stream(options.seed, static_cast<std::uint64_t>(trial));
    AssemblyAssignment a;
    try {
      a = selector(rng);
    } catch (const std::exception&) {
      ++acc.failures;
      continue;
    }
    ++acc.successes;
    if (options.check_ex_post) {
      auto v = check_ex_post(inst, a, n, options.slack, trial);
      acc.violation_count += static_cast<std::int64_t>(v.size());
      for (auto& x : v) {
        if (acc.violations.size() < options.max_recorded_violations) acc.violations.push_back(std::move(x));
      }
    }
    std::fill(seats.begin(), seats.end(), 0);
    for (std::size_t v = 0; v < nodes; ++v) {
      sorted[v] = v < a.assemblies.size() ? a.assemblies[v] : std::vector<Member>{};
      std::sort(sorted[v].begin(), sorted[v].end());
      for (const Member& m : sorted[v]) {
        if (auto k = layout.key(inst, v, m.cls)) ++seats[*k];
      }
    }
    for (std::size_t k = 0; k < seats.size(); ++k) {
      acc.seat_sum[k] += seats[k];
      acc.seat_sumsq[k] += seats[k] * seats[k];
    }
    for (std::size_t t = 0; t < layout.tracked.size(); ++t) {
      const auto& pool = sorted[idx(layout.keys[layout.tracked[t].first].first)];
      acc.person_hits[t] += std::binary_search(pool.begin(), pool.end(), layout.tracked[t].second);
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& p = sorted[idx(edges[e].parent)];
      const auto& c = sorted[idx(edges[e].child)];
      std::int64_t common = 0;
      auto i = p.begin();
      auto j = c.begin();
      while (i != p.end() && j != c.end()) {
        if (*i < *j) {
          ++i;
        } else if (*j < *i) {
          ++j;
        } else {
          ++common;
          ++i;
          ++j;
        }
      }
      acc.overlap_sum[e] += common;
      acc.overlap_sumsq[e] += common * common;
    }
  }
}

double sample_sd(std::int64_t sum, std::int64_t sumsq, std::int64_t m) {
  if (m < 2) return 0;
  const double mean = static_cast<double>(sum) / static_cast<double>(m);
  const double var = (static_cast<double>(sumsq) - mean * static_cast<double>(sum)) / static_cast<double>(m - 1);
  return var > 0 ? std::sqrt(var) : 0.0;
}

bool close(double value, double target, double band) {
  return std::abs(value - target) <= band + 1e-9 * std::max(1.0, std::abs(target));
}

}  // namespace

bool VerificationReport::individual_ok() const {
  return std::all_of(class_frequencies.begin(), class_frequencies.end(), [](const auto& c) { return c.within; }) &&
         std::all_of(person_frequencies.begin(), person_frequencies.end(), [](const auto& p) { return p.within; });
}

bool VerificationReport::ex_ante_ok() const {
  return std::all_of(overlaps.begin(), overlaps.end(), [](const auto& o) { return o.meets_quota; });
}

VerificationReport monte_carlo_ex_ante(const Selector& selector, const Instance& inst, std::int64_t n,
                                       const MonteCarloOptions& options) {
  const Layout layout(inst);
  const unsigned threads = std::max(1u, options.threads);
  std::vector<Accumulator> parts(threads);
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      const std::int64_t begin = options.trials * t / threads;
      const std::int64_t end = options.trials * (t + 1) / threads;
      workers.emplace_back([&, t, begin, end] {
        run_trials(selector, inst, n, options, layout, begin, end, parts[t]);
      });
    }
  }
  Accumulator acc = std::move(parts[0]);
  for (unsigned t = 1; t < threads; ++t) acc.merge(parts[t]);
  std::stable_sort(acc.violations.begin(), acc.violations.end(),
            [](const auto& a, const auto& b) { return a.draw < b.draw; });
  if (acc.violations.size() > options.max_recorded_violations) {
    acc.violations.resize(options.max_recorded_violations);
  }

  VerificationReport report;
  report.n = n;
  report.trials = options.trials;
  report.successful_trials = acc.successes;
  report.seed = options.seed;
  report.sigmas = options.sigmas;
  report.selector_failures = acc.failures;
  report.ex_post_violation_count = acc.violation_count;
  report.ex_post_violations = std::move(acc.violations);
  const std::int64_t m = acc.successes;
  const double root_m = std::sqrt(static_cast<double>(std::max<std::int64_t>(m, 1)));

  for (std::size_t k = 0; k < layout.keys.size(); ++k) {
    const auto [v, c] = layout.keys[k];
    const double size = static_cast<double>(inst.class_size(c));
    ClassFrequency f{v, c};
    f.frequency = static_cast<double>(acc.seat_sum[k]) / (static_cast<double>(std::max<std::int64_t>(m, 1)) * size);
    f.target = static_cast<double>(n) / static_cast<double>(inst.population(v));
    f.band = options.sigmas * sample_sd(acc.seat_sum[k], acc.seat_sumsq[k], m) / size / root_m;
    f.within = m > 0 && close(f.frequency, f.target, f.band);
    report.class_frequencies.push_back(f);
  }
  for (std::size_t t = 0; t < layout.tracked.size(); ++t) {
    const NodeId v = layout.keys[layout.tracked[t].first].first;
    PersonFrequency p{v, layout.tracked[t].second};
    p.frequency = static_cast<double>(acc.person_hits[t]) / static_cast<double>(std::max<std::int64_t>(m, 1));
    p.target = static_cast<double>(n) / static_cast<double>(inst.population(v));
    p.band = options.sigmas * std::sqrt(std::max(0.0, p.target * (1 - p.target)) / static_cast<double>(std::max<std::int64_t>(m, 1)));
    p.within = m > 0 && close(p.frequency, p.target, p.band);
    report.person_frequencies.push_back(p);
  }
  const auto edges = inst.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    OverlapStatistic o{edges[e]};
    o.mean = static_cast<double>(acc.overlap_sum[e]) / static_cast<double>(std::max<std::int64_t>(m, 1));
    o.sd = sample_sd(acc.overlap_sum[e], acc.overlap_sumsq[e], m);
    o.quota_target = to_double(make_rational(n) * quota(inst, edges[e].parent, edges[e].child));
    o.full_share = static_cast<double>(n) * static_cast<double>(inst.population(edges[e].child)) /
                   static_cast<double>(inst.population(edges[e].parent));
    o.band = options.sigmas * o.sd / root_m;
    o.meets_quota = m > 0 && o.mean >= o.quota_target - o.band - 1e-9 * std::max(1.0, o.quota_target);
    report.overlaps.push_back(o);
  }
  return report;
}

std::string report_json(const Instance& inst, const VerificationReport& r) {
  using Json = nlohmann::ordered_json;
  Json root;
  root["n"] = r.n;
  root["trials"] = r.trials;
  root["successful_trials"] = r.successful_trials;
  root["seed"] = r.seed;
  root["sigmas"] = r.sigmas;
  root["selector_failures"] = r.selector_failures;
  root["ex_post_violation_count"] = r.ex_post_violation_count;
  root["ex_post_violations"] = Json::array();
  for (const auto& v : r.ex_post_violations) {
    root["ex_post_violations"].push_back(
        {{"draw", v.draw}, {"constraint", v.constraint}, {"observed", v.observed}, {"required", v.required}});
  }
  root["class_frequencies"] = Json::array();
  for (const auto& f : r.class_frequencies) {
    root["class_frequencies"].push_back({{"node", inst.name(f.node)},
                                         {"class", idx(f.cls)},
                                         {"frequency", f.frequency},
                                         {"target", f.target},
                                         {"band", f.band},
                                         {"within", f.within}});
  }
  root["person_frequencies"] = Json::array();
  for (const auto& p : r.person_frequencies) {
    root["person_frequencies"].push_back({{"node", inst.name(p.node)},
                                          {"member", {idx(p.member.cls), p.member.index}},
                                          {"frequency", p.frequency},
                                          {"target", p.target},
                                          {"band", p.band},
                                          {"within", p.within}});
  }
  root["overlaps"] = Json::array();
  for (const auto& o : r.overlaps) {
    root["overlaps"].push_back({{"parent", inst.name(o.edge.parent)},
                                {"child", inst.name(o.edge.child)},
                                {"mean", o.mean},
                                {"sd", o.sd},
                                {"quota_target", o.quota_target},
                                {"full_share", o.full_share},
                                {"band", o.band},
                                {"meets_quota", o.meets_quota}});
  }
  root["individual_ok"] = r.individual_ok();
  root["ex_ante_ok"] = r.ex_ante_ok();
  root["ex_post_ok"] = r.ex_post_ok();
  return root.dump(2) + "\n";
}

std::string report_csv(const Instance& inst, const VerificationReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "kind,subject,value,target,band,ok\n";
  for (const auto& f : r.class_frequencies) {
    out << "class_frequency," << inst.name(f.node) << "/class" << idx(f.cls) << ',' << f.frequency << ','
        << f.target << ',' << f.band << ',' << (f.within ? 1 : 0) << '\n';
  }
  for (const auto& p : r.person_frequencies) {
    out << "person_frequency," << inst.name(p.node) << "/class" << idx(p.member.cls) << '#' << p.member.index
        << ',' << p.frequency << ',' << p.target << ',' << p.band << ',' << (p.within ? 1 : 0) << '\n';
  }
  for (const auto& o : r.overlaps) {
    out << "overlap," << inst.name(o.edge.parent) << "->" << inst.name(o.edge.child) << ',' << o.mean << ','
        << o.quota_target << ',' << o.band << ',' << (o.meets_quota ? 1 : 0) << '\n';
  }
  for (const auto& v : r.ex_post_violations) {
    out << "ex_post_violation," << v.constraint << "@draw" << v.draw << ',' << v.observed << ',' << v.required
        << ",0,0\n";
  }
  return out.str();
}

namespace {

RoundingCheck check_distribution(const OutcomeDistribution& dist, std::span<const Rational> marginals,
                                 const std::function<bool(const std::vector<std::int64_t>&)>& admissible) {
  RoundingCheck out;
  Rational total = 0;
  std::vector<Rational> mean(marginals.size(), 0);
  for (const auto& [x, p] : dist) {
    if (p <= 0) {
      out.detail = "non-positive outcome probability";
      return out;
    }
    total += p;
    for (std::size_t i = 0; i < x.size(); ++i) mean[i] += p * x[i];
    if (!admissible(x)) {
      std::string s;
      for (auto v : x) s += (s.empty() ? "" : ",") + std::to_string(v);
      out.detail = "outcome (" + s + ") violates a constraint";
      return out;
    }
  }
  if (total != 1) {
    out.detail = "probabilities sum to " + to_string(total);
    return out;
  }
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    if (mean[i] != marginals[i]) {
      out.detail = "coordinate " + std::to_string(i) + " has expectation " + to_string(mean[i]) +
                   " instead of " + to_string(marginals[i]);
      return out;
    }
  }
  out.passed = true;
  return out;
}

}  // namespace

RoundingCheck exact_rounding_check(const RoundingProblem& problem, std::size_t max_dimension) {
  try {
    check_bihierarchy(problem);
  } catch (const NotABihierarchy& e) {
    RoundingCheck out;
    out.rejected = true;
    out.detail = e.what();
    return out;
  }
  const OutcomeDistribution dist = exact_outcome_distribution(problem, max_dimension);
  return check_distribution(dist, problem.marginals,
                            [&](const std::vector<std::int64_t>& x) { return satisfies_constraints(problem, x); });
}

RoundingCheck exact_fixed_sum_check(std::span<const Rational> marginals, std::size_t max_dimension) {
  const OutcomeDistribution dist = exact_fixed_sum_distribution(marginals, max_dimension);
  Rational sum = 0;
  for (const auto& p : marginals) sum += p;
  return check_distribution(dist, marginals, [&](const std::vector<std::int64_t>& x) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < floor_i64(marginals[i]) || x[i] > ceil_i64(marginals[i])) return false;
      s += x[i];
    }
    return Rational(s) == sum;
  });
}

}  // namespace fedasm
