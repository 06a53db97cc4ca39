#include <doctest.h>

#include <set>

#include "fedasm/instance.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fedasm;

namespace {

InstanceSpec shared_pair_spec() {
  InstanceSpec spec;
  spec.nodes = {"f", "c1", "c2"};
  spec.edges = {{"f", "c1"}, {"f", "c2"}};
  spec.classes = {{{"c1"}, 1}, {{"c2"}, 1}, {{"c1", "c2"}, 2}};
  return spec;
}

}  // namespace

TEST_SUITE("instance_model") {

TEST_CASE("minimal instance validates") {
  InstanceSpec spec;
  spec.nodes = {"l"};
  spec.classes = {{{"l"}, 10}};
  CHECK(validate(spec).ok());
  const Instance inst = Instance::build(spec);
  CHECK(inst.population(inst.at("l")) == 10);
  CHECK(classify(inst).kind == InstanceKind::Laminar);
}

TEST_CASE("cycles are reported") {
  InstanceSpec spec;
  spec.nodes = {"a", "b"};
  spec.edges = {{"a", "b"}, {"b", "a"}};
  spec.classes = {{{"a"}, 1}};
  const ValidationReport report = validate(spec);
  CHECK_FALSE(report.ok());
  CHECK(report.has(IssueKind::Cycle));
  CHECK_THROWS_AS(Instance::build(spec), InvalidInstance);
}

TEST_CASE("classes may only sign up for leaves") {
  InstanceSpec spec;
  spec.nodes = {"f", "l"};
  spec.edges = {{"f", "l"}};
  spec.classes = {{{"l"}, 3}, {{"f"}, 2}};
  const ValidationReport report = validate(spec);
  CHECK(report.has(IssueKind::ClassLeafNotLeaf));
}

TEST_CASE("malformed specs produce issues rather than exceptions") {
  InstanceSpec spec;
  spec.nodes = {"a", "a", "b"};
  spec.edges = {{"a", "zz"}, {"b", "b"}};
  spec.classes = {{{}, 0}, {{"nowhere"}, 1}};
  ValidationReport report;
  CHECK_NOTHROW(report = validate(spec));
  CHECK(report.has(IssueKind::DuplicateNode));
  CHECK(report.has(IssueKind::UnknownEdgeEndpoint));
  CHECK(report.has(IssueKind::SelfLoop));
  CHECK(report.has(IssueKind::EmptyLeafSet));
  CHECK(report.has(IssueKind::UnknownClassLeaf));
  CHECK(report.has(IssueKind::NonPositiveClassSize));
  CHECK(validate(InstanceSpec{}).has(IssueKind::EmptyNodeList));
}

TEST_CASE("duplicate classes and uncovered leaves are errors") {
  InstanceSpec spec;
  spec.nodes = {"f", "a", "b"};
  spec.edges = {{"f", "a"}, {"f", "b"}};
  spec.classes = {{{"a"}, 3}, {{"a"}, 4}};
  const ValidationReport report = validate(spec);
  CHECK(report.has(IssueKind::DuplicateClass));
  CHECK(report.has(IssueKind::LeafWithoutClass));
}

TEST_CASE("populations below the assembly size are flagged") {
  const Instance inst = testing::two_leaf(3, 10);
  CHECK(validate(inst, 3).ok());
  const ValidationReport report = validate(inst, 4);
  CHECK(report.has(IssueKind::PopulationBelowAssemblySize));
}

TEST_CASE("weighted population splits shared members evenly") {
  const Instance inst = Instance::build(shared_pair_spec());
  const NodeId f = inst.at("f");
  CHECK(weighted_population(inst, f, inst.at("c1")) == 2);
  CHECK(weighted_population(inst, f, inst.at("c2")) == 2);
  CHECK(quota(inst, f, inst.at("c1")) == Rational(1, 2));
  CHECK(weighted_population(inst, f, inst.at("c1")) == oracle::weighted_population(inst.spec(), "f", "c1"));
}

TEST_CASE("a member of three children counts a third towards each") {
  InstanceSpec spec;
  spec.nodes = {"f", "a", "b", "c"};
  spec.edges = {{"f", "a"}, {"f", "b"}, {"f", "c"}};
  spec.classes = {{{"a", "b", "c"}, 1}, {{"a"}, 5}, {{"b"}, 5}, {{"c"}, 5}};
  const Instance inst = Instance::build(spec);
  CHECK(weighted_population(inst, inst.at("f"), inst.at("a")) == Rational(16, 3));
  CHECK(multiplicity(inst, inst.at("f"), class_id(0)) == 3);
}

TEST_CASE("disjoint children get proportional quotas") {
  const Instance inst = testing::two_leaf(60, 40);
  const NodeId f = inst.at("f");
  CHECK(weighted_population(inst, f, inst.at("a")) == 60);
  CHECK(quota(inst, f, inst.at("a")) == Rational(3, 5));
  CHECK(quota(inst, f, inst.at("b")) == Rational(2, 5));
  CHECK_THROWS_AS(weighted_population(inst, inst.at("a"), inst.at("b")), std::invalid_argument);
}

TEST_CASE("generated instances validate and agree with the reference definitions") {
  const std::int64_t sizes[] = {2, 5, 10, 20};
  std::int64_t generated = 0;
  for (std::uint64_t seed = 0; seed < 63; ++seed) {
    for (std::int64_t classes : sizes) {
      for (std::int64_t feds : sizes) {
        const Instance inst = generate_instance(classes, feds, seed);
        ++generated;
        REQUIRE(validate(inst.spec()).ok());
        CHECK(inst.num_classes() == static_cast<std::size_t>(classes));
        CHECK(inst.federations().size() == static_cast<std::size_t>(feds));
        for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
          const NodeId node = node_id(v);
          CHECK(inst.population(node) > 0);
          CHECK(population_via_classes(inst, node) == inst.population(node));
          if (inst.is_leaf(node)) continue;
          Rational total = 0;
          for (NodeId c : inst.children(node)) total += quota(inst, node, c);
          CHECK(total == 1);
        }
      }
    }
  }
  CHECK(generated >= 1000);
}

TEST_CASE("weighted populations match the person-level definition on small generated instances") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Instance inst = generate_instance(5, 5, seed);
    for (const Edge& e : inst.edges()) {
      const std::string& f = inst.name(e.parent);
      const std::string& c = inst.name(e.child);
      CHECK(weighted_population(inst, e.parent, e.child) == oracle::weighted_population(inst.spec(), f, c));
      CHECK(inst.population(e.child) == oracle::population(inst.spec(), c));
    }
  }
}

TEST_CASE("generation is deterministic and has the requested shape") {
  const Instance a = generate_instance(2, 2, 17);
  const Instance b = generate_instance(2, 2, 17);
  CHECK(a.spec() == b.spec());
  CHECK(a.num_classes() == 2);
  CHECK(a.federations().size() == 2);
  CHECK(classify(a).kind != InstanceKind::SemiLaminar);
  CHECK_FALSE(generate_instance(5, 5, 1).spec() == generate_instance(5, 5, 2).spec());
}

TEST_CASE("generator class sizes follow the configured mean") {
  GeneratorOptions options;
  options.mean_class_size = 40;
  double total = 0;
  std::int64_t count = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const Instance inst = generate_instance(20, 1, seed, options);
    for (std::size_t c = 0; c < inst.num_classes(); ++c) {
      CHECK(inst.class_size(class_id(c)) >= options.min_class_size);
      total += static_cast<double>(inst.class_size(class_id(c)));
      ++count;
    }
  }
  CHECK(total / static_cast<double>(count) == doctest::Approx(40).epsilon(0.05));
}

TEST_CASE("classification") {
  SUBCASE("path tree with singleton classes is laminar") {
    InstanceSpec spec;
    spec.nodes = {"a", "b", "c"};
    spec.edges = {{"a", "b"}, {"b", "c"}};
    spec.classes = {{{"c"}, 4}};
    CHECK(classify(Instance::build(spec)).kind == InstanceKind::Laminar);
  }
  SUBCASE("one federation over leaves with shared classes is a single-region semi-laminar instance") {
    const Classification cls = classify(Instance::build(shared_pair_spec()));
    REQUIRE(cls.kind == InstanceKind::SemiLaminar);
    CHECK(cls.semilaminar->num_regions() == 1);
    CHECK(cls.semilaminar->num_topics == 2);
  }
  SUBCASE("root with two leaf regions and two topics is semi-laminar") {
    SemiLaminarLayout layout;
    layout.region_parent = {std::nullopt, 0, 0};
    layout.num_topics = 2;
    layout.classes = {{1, {0}, 5}, {1, {1}, 5}, {1, {0, 1}, 3}, {2, {0}, 4}, {2, {1}, 6}};
    const Classification cls = classify(build_semilaminar(layout));
    REQUIRE(cls.kind == InstanceKind::SemiLaminar);
    REQUIRE(cls.semilaminar);
    CHECK(cls.semilaminar->num_regions() == 3);
    CHECK(cls.semilaminar->num_topics == 2);
  }
  SUBCASE("the iterative impossibility fixture has one region and 2n topics") {
    for (std::int64_t n : {1, 2, 3}) {
      const Classification cls = classify(iterative_impossibility_fixture(n, 2));
      REQUIRE(cls.kind == InstanceKind::SemiLaminar);
      CHECK(cls.semilaminar->num_regions() == 1);
      CHECK(cls.semilaminar->num_topics == static_cast<std::size_t>(2 * n));
    }
  }
  SUBCASE("the non-tree variant of the fixture is general") {
    CHECK(classify(testing::non_tree_fixture(1, 2)).kind == InstanceKind::General);
    CHECK(classify(testing::non_tree_fixture(2, 3)).kind == InstanceKind::General);
  }
}

TEST_CASE("semi-laminar layouts are recovered up to relabeling") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    SemiLaminarLayout layout;
    const std::size_t regions = 2 + rng.below(5);
    layout.num_topics = 1 + rng.below(4);
    layout.region_parent.push_back(std::nullopt);
    for (std::size_t r = 1; r < regions; ++r) layout.region_parent.push_back(rng.below(r));
    std::vector<char> internal(regions, 0);
    for (std::size_t r = 1; r < regions; ++r) internal[*layout.region_parent[r]] = 1;
    for (std::size_t r = 0; r < regions; ++r) {
      if (internal[r]) continue;
      for (std::size_t t = 0; t < layout.num_topics; ++t) layout.classes.push_back({r, {t}, 3});
      if (layout.num_topics > 1) layout.classes.push_back({r, {0, layout.num_topics - 1}, 2});
    }
    const Instance inst = build_semilaminar(layout);
    const Classification cls = classify(inst);
    REQUIRE(cls.kind == InstanceKind::SemiLaminar);
    const SemiLaminarStructure& st = *cls.semilaminar;
    CHECK(st.num_regions() == regions);
    CHECK(st.num_topics == layout.num_topics);
    std::multiset<std::size_t> expected_fanout;
    std::multiset<std::size_t> found_fanout;
    for (std::size_t r = 0; r < regions; ++r) {
      std::size_t kids = 0;
      for (std::size_t q = 1; q < regions; ++q) kids += *layout.region_parent[q] == r;
      expected_fanout.insert(kids);
      found_fanout.insert(st.region_children[r].size());
    }
    CHECK(expected_fanout == found_fanout);
    for (std::size_t c = 0; c < inst.num_classes(); ++c) {
      CHECK(st.class_topics[c].size() == layout.classes[c].topics.size());
      CHECK(st.is_leaf_region(st.class_region[c]));
    }
  }
}

TEST_CASE("near misses of the semi-laminar shape classify as general") {
  SemiLaminarLayout layout;
  layout.region_parent = {std::nullopt, 0, 0};
  layout.num_topics = 2;
  layout.classes = {{1, {0}, 5}, {1, {1}, 5}, {2, {0}, 4}, {2, {1}, 6}};
  InstanceSpec spec = build_semilaminar(layout).spec();
  spec.edges.pop_back();
  spec.edges.emplace_back("r0:*", "r2:t1");
  CHECK(classify(Instance::build(spec)).kind == InstanceKind::General);
}

TEST_CASE("iterative impossibility fixture") {
  SUBCASE("n = 1, k = 2") {
    const Instance inst = iterative_impossibility_fixture(1, 2);
    CHECK(inst.num_nodes() == 3);
    CHECK(inst.num_classes() == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(inst.class_size(class_id(c)) == 2);
    const NodeId f = inst.at("f");
    for (NodeId c : inst.children(f)) CHECK(quota(inst, f, c) == Rational(1, 2));
  }
  SUBCASE("n = 2, k = 3") {
    const Instance inst = iterative_impossibility_fixture(2, 3);
    const NodeId f = inst.at("f");
    CHECK(inst.children(f).size() == 4);
    std::multiset<std::int64_t> sizes;
    for (std::size_t c = 0; c < inst.num_classes(); ++c) sizes.insert(inst.class_size(class_id(c)));
    CHECK(sizes == std::multiset<std::int64_t>{3, 3, 3, 3, 9});
    for (NodeId c : inst.children(f)) CHECK(quota(inst, f, c) == Rational(1, 4));
  }
}

}  // TEST_SUITE
