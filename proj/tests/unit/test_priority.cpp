#include <doctest.h>

#include <cmath>

#include "fedasm/priority_selection.hpp"
#include "fedasm/verifier.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fedasm;

namespace {

// Leaf "l" holds a class of size 1 and a class of size 2 (shared with "m").
Instance one_and_two() {
  InstanceSpec spec;
  spec.nodes = {"f", "l", "m"};
  spec.edges = {{"f", "l"}, {"f", "m"}};
  spec.classes = {{{"l"}, 1}, {{"l", "m"}, 2}, {{"m"}, 5}};
  return Instance::build(spec);
}

}  // namespace

TEST_SUITE("selection_exante") {

TEST_CASE("winner classes at a leaf follow class sizes") {
  const Instance inst = one_and_two();
  const NodeId l = inst.at("l");
  Rng rng(1);
  const std::int64_t trials = 300'000;
  std::int64_t small = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    const PriorityDraw d = draw_priority(inst, 1, rng);
    small += d.winners[idx(l)][0] == class_id(0);
  }
  const double freq = static_cast<double>(small) / trials;
  CHECK(std::abs(freq - 1.0 / 3.0) <= oracle::binomial_band(1.0 / 3.0, trials));
}

TEST_CASE("every draw satisfies the ex post properties") {
  Rng rng(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorOptions g;
    g.min_class_size = 4;
    const Instance inst = generate_instance(4, 4, seed, g);
    for (int i = 0; i < 200; ++i) {
      const AssemblyAssignment a = select_priority(inst, 4, rng);
      // Priority selection guarantees sizes, membership and inheritance;
      // overlap floors are not part of its promise, so they get full slack.
      std::map<std::pair<std::string, std::string>, std::int64_t> slack;
      for (const auto& [p, c] : inst.spec().edges) slack[{p, c}] = 4;
      REQUIRE(oracle::ex_post_violations(inst, a, 4, slack) == 0);
    }
  }
}

TEST_CASE("a child's assembly equals its parent's with probability proportional to its population") {
  const Instance inst = testing::two_leaf(30, 70);
  Rng rng(3);
  const std::int64_t trials = 300'000;
  std::int64_t same = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    const AssemblyAssignment a = select_priority(inst, 1, rng);
    same += a.assembly(inst.at("f"))[0] == a.assembly(inst.at("a"))[0];
  }
  const double freq = static_cast<double>(same) / trials;
  CHECK(std::abs(freq - 0.3) <= oracle::binomial_band(0.3, trials));
}

TEST_CASE("expected ranks equal n |C| / |N_v|") {
  GeneratorOptions g;
  g.min_class_size = 3;
  g.mean_class_size = 8;
  const Instance inst = generate_instance(4, 3, 11, g);
  const std::int64_t n = 3;
  Rng rng(4);
  const std::int64_t trials = 100'000;
  std::vector<std::vector<double>> sum(inst.num_nodes(), std::vector<double>(inst.num_classes(), 0));
  std::vector<std::vector<double>> sumsq = sum;
  for (std::int64_t i = 0; i < trials; ++i) {
    const PriorityDraw d = draw_priority(inst, n, rng);
    REQUIRE_FALSE(d.failed);
    for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
      std::int64_t total = 0;
      for (std::size_t c = 0; c < inst.num_classes(); ++c) {
        const auto r = static_cast<double>(d.ranks.counts[v][c]);
        total += d.ranks.counts[v][c];
        sum[v][c] += r;
        sumsq[v][c] += r * r;
      }
      REQUIRE(total == n);
    }
  }
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    for (ClassId c : inst.classes_of(node_id(v))) {
      const double mean = sum[v][idx(c)] / trials;
      const double var = sumsq[v][idx(c)] / trials - mean * mean;
      const double target = static_cast<double>(n * inst.class_size(c)) /
                            static_cast<double>(oracle::population(inst.spec(), inst.name(node_id(v))));
      CHECK(std::abs(mean - target) <= 4 * std::sqrt(var / trials) + 1e-12);
    }
  }
}

TEST_CASE("individual representation on a compliant instance") {
  GeneratorOptions g;
  g.min_class_size = 2;
  g.mean_class_size = 6;
  const Instance inst = generate_instance(3, 3, 5, g);
  MonteCarloOptions mc;
  mc.trials = 100'000;
  mc.seed = 9;
  mc.check_ex_post = false;
  const auto report =
      monte_carlo_ex_ante([&](Rng& rng) { return select_priority(inst, 2, rng); }, inst, 2, mc);
  CHECK(report.selector_failures == 0);
  CHECK(report.individual_ok());
  CHECK(report.ex_ante_ok());
}

TEST_CASE("small classes are refused without restarts") {
  const Instance inst = testing::two_leaf(2, 10);
  Rng rng(5);
  CHECK_THROWS_AS(select_priority(inst, 3, rng), PreconditionError);
  try {
    select_priority(inst, 3, rng);
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("restart") != std::string::npos);
  }
}

TEST_CASE("restarts never happen when every class has n members") {
  GeneratorOptions g;
  g.min_class_size = 5;
  const Instance inst = generate_instance(5, 5, 2, g);
  Rng rng(6);
  for (int i = 0; i < 10'000; ++i) REQUIRE_FALSE(draw_priority(inst, 5, rng).failed);
}

TEST_CASE("restart variant succeeds on small classes and keeps the ex post properties") {
  const Instance inst = testing::restart_prone(3, 4);
  Rng rng(7);
  std::map<std::pair<std::string, std::string>, std::int64_t> slack;
  for (const auto& [p, c] : inst.spec().edges) slack[{p, c}] = 4;
  for (int i = 0; i < 2000; ++i) {
    const AssemblyAssignment a = select_priority_with_restart(inst, 4, rng);
    REQUIRE(oracle::ex_post_violations(inst, a, 4, slack) == 0);
  }
}

TEST_CASE("exhausted restarts report the failure count") {
  InstanceSpec spec;
  spec.nodes = {"l"};
  spec.classes = {{{"l"}, 1}};
  const Instance inst = Instance::build(spec);
  Rng rng(8);
  try {
    select_priority_with_restart(inst, 2, rng, 25);
    FAIL("expected RestartsExhausted");
  } catch (const RestartsExhausted& e) {
    CHECK(e.failures == 25);
  }
}

TEST_CASE("failure bound for a single small class") {
  // Leaf l: 997 + 3 members; leaf m: the shared 3 plus a million more.
  InstanceSpec spec;
  spec.nodes = {"f", "l", "m"};
  spec.edges = {{"f", "l"}, {"f", "m"}};
  spec.classes = {{{"l"}, 997}, {{"l", "m"}, 3}, {{"m"}, 1'000'000}};
  const Instance inst = Instance::build(spec);
  const double e = std::exp(1.0);
  const double expected = std::pow(5 * e / 1000, 3) + std::pow(5 * e / 1000, 997) +
                          std::pow(5 * e / 1'000'003, 3) + std::pow(5 * e / 1'000'003, 1'000'000);
  CHECK(failure_probability_bound(inst, 5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(failure_probability_bound(inst, 5) == doctest::Approx(2.5e-6).epsilon(0.02));
}

TEST_CASE("failure bound is capped at one") {
  const Instance inst = testing::two_leaf(1, 1);
  CHECK(failure_probability_bound(inst, 1) == 1.0);
}

}  // TEST_SUITE
