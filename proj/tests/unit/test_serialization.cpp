#include <doctest.h>

#include "fedasm/laminar_selection.hpp"
#include "fedasm/serialization.hpp"
#include "fixtures.hpp"

using namespace fedasm;

TEST_SUITE("instance_model") {

TEST_CASE("instances round-trip through JSON") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Instance inst = generate_instance(2 + seed % 9, 1 + seed % 7, seed);
    const std::string text = serialize_instance(inst);
    CHECK(parse_instance_spec(text) == inst.spec());
    CHECK(serialize_instance(parse_instance(text)) == text);
  }
}

TEST_CASE("unknown fields are rejected with their location") {
  const std::string text = R"({"nodes":[{"id":"a","color":"red"}],"edges":[],"classes":[{"leaves":["a"],"size":3}]})";
  try {
    parse_instance_spec(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.location() == "/nodes/0/color");
    CHECK(std::string(e.what()).find("color") != std::string::npos);
  }
}

TEST_CASE("missing fields and wrong types") {
  CHECK_THROWS_AS(parse_instance_spec(R"({"nodes":[],"edges":[]})"), ParseError);
  CHECK_THROWS_AS(parse_instance_spec(R"({"nodes":[{"id":1}],"edges":[],"classes":[]})"), ParseError);
  CHECK_THROWS_AS(parse_instance_spec(R"({"nodes":[],"edges":[["a"]],"classes":[]})"), ParseError);
  CHECK_THROWS_AS(parse_instance_spec(R"({"nodes":[],"edges":[],"classes":[{"leaves":["a"],"size":1.5}]})"),
                  ParseError);
}

TEST_CASE("syntax errors report a byte offset") {
  try {
    parse_instance_spec(R"({"nodes": [)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.location().rfind("byte ", 0) == 0);
  }
}

TEST_CASE("well-formed JSON with an invalid model is rejected at build") {
  try {
    parse_instance(R"({"nodes":[{"id":"a"}],"edges":[],"classes":[]})");
    FAIL("expected InvalidInstance");
  } catch (const InvalidInstance& e) {
    CHECK(e.report().has(IssueKind::EmptyClassList));
  }
  try {
    parse_instance(R"({"nodes":[{"id":"a"},{"id":"b"}],"edges":[["a","b"],["b","a"]],"classes":[{"leaves":["a"],"size":1}]})");
    FAIL("expected InvalidInstance");
  } catch (const InvalidInstance& e) {
    CHECK(e.report().has(IssueKind::Cycle));
  }
}

TEST_CASE("assignments round-trip") {
  const Instance inst = testing::small_tree(10, 8, 6);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const AssemblyAssignment a = select_laminar(inst, 3, rng);
    const std::string text = serialize_assignment(inst, a);
    CHECK(parse_assignment(text, inst) == a);
  }
  CHECK_THROWS_AS(parse_assignment(R"({"n":1,"assemblies":{"nowhere":[]}})", inst), ParseError);
  CHECK_THROWS_AS(parse_assignment(R"({"n":1,"assemblies":{"l1":[[0,99]]}})", inst), ParseError);
  CHECK_THROWS_AS(parse_assignment(R"({"n":0,"assemblies":{}})", inst), ParseError);
}

TEST_CASE("randomized assignments round-trip with exact weights") {
  const Instance inst = testing::two_leaf(5, 3);
  RandomizedAssignment r;
  r.n = 2;
  CanonicalAssignment a;
  a.n = 2;
  a.counts = {{1, 1}, {2, 0}, {0, 2}};
  CanonicalAssignment b = a;
  b.counts[0] = {2, 0};
  r.support = {a, b};
  r.weights = {0.1, 0.9000000000000001};
  const RandomizedAssignment back = parse_randomized(serialize_randomized(inst, r), inst);
  CHECK(back.n == 2);
  CHECK(back.support == r.support);
  CHECK(back.weights == r.weights);
  CHECK_THROWS_AS(parse_randomized(R"({"n":2,"support":[{"weight":"-1","counts":{}}]})", inst), ParseError);
  CHECK_THROWS_AS(parse_randomized(R"({"n":2,"support":[{"weight":"abc","counts":{}}]})", inst), ParseError);
}

}  // TEST_SUITE
