#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "fedasm/serialization.hpp"
#include "fixtures.hpp"

using namespace fedasm;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fedasm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fedasm_cli_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::string write_instance(const std::string& name, const Instance& inst) {
  const std::string path = scratch(name);
  write_file(path, serialize_instance(inst));
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate is deterministic and validates") {
  const Result a = invoke({"generate", "--classes", "5", "--federations", "3", "--seed", "7"});
  const Result b = invoke({"generate", "--classes", "5", "--federations", "3", "--seed", "7"});
  REQUIRE(a.code == cli::kOk);
  CHECK(a.out == b.out);
  CHECK(a.out == serialize_instance(generate_instance(5, 3, 7)));
  const std::string path = scratch("generated.json");
  write_file(path, a.out);
  const Result v = invoke({"validate", path});
  CHECK(v.code == cli::kOk);
  const auto j = nlohmann::json::parse(v.out);
  CHECK(j.at("valid") == true);
}

TEST_CASE("select writes a parseable assignment") {
  const Instance inst = testing::small_tree(10, 8, 6);
  const std::string path = write_instance("tree.json", inst);
  const Result r = invoke({"select", path, "--algo", "laminar", "--n", "3", "--seed", "1"});
  REQUIRE(r.code == cli::kOk);
  const AssemblyAssignment a = parse_assignment(r.out, inst);
  CHECK(a.n == 3);
}

TEST_CASE("refusals name the instance classification") {
  const std::string path = write_instance("fixture.json", testing::non_tree_fixture(1, 2));
  const Result r = invoke({"select", path, "--algo", "laminar", "--n", "1"});
  CHECK(r.code == cli::kPrecondition);
  CHECK(r.err.find("general") != std::string::npos);
  CHECK(nlohmann::json::parse(r.err).at("error") == "precondition_refused");
}

TEST_CASE("exit codes") {
  const std::string bad_model = scratch("bad_model.json");
  write_file(bad_model, R"({"nodes":[{"id":"a"}],"edges":[],"classes":[]})");
  CHECK(invoke({"validate", bad_model}).code == cli::kInvalidInstance);

  const std::string unknown = scratch("unknown_field.json");
  write_file(unknown, R"({"nodes":[],"edges":[],"classes":[],"extra":1})");
  const Result u = invoke({"validate", unknown});
  CHECK(u.code == cli::kInvalidInstance);
  CHECK(nlohmann::json::parse(u.err).at("location") == "/extra");

  CHECK(invoke({"validate", scratch("does_not_exist.json")}).code == cli::kIo);
  CHECK(invoke({"select", bad_model, "--bogus"}).code == cli::kUsage);
  CHECK(invoke({"no-such-command"}).code == cli::kUsage);
}

TEST_CASE("optimize writes a trace and a randomized assignment") {
  const Instance inst = testing::two_leaf(50, 30);
  const std::string path = write_instance("two_leaf.json", inst);
  const std::string out = scratch("randomized.json");
  const std::string trace = scratch("trace.csv");
  const Result r = invoke({"optimize", path, "--n", "4", "-o", out, "--trace", trace});
  REQUIRE(r.code == cli::kOk);
  const RandomizedAssignment ra = parse_randomized(read_file(out), inst);
  CHECK(ra.n == 4);
  CHECK(read_file(trace).rfind("iteration,support_size,loss,wall_time_ms\n", 0) == 0);

  const Result v = invoke({"verify", path, "--algo", "randomized", "--randomized", out, "--trials", "2000",
                           "--threads", "1"});
  REQUIRE(v.code == cli::kOk);
  const auto j = nlohmann::json::parse(v.out);
  CHECK(j.at("trials") == 2000);

  const Result stuck = invoke({"optimize", write_instance("big.json", generate_instance(5, 5, 3)), "--n", "3",
                               "--max-iters", "1", "--tolerance", "1e-12"});
  CHECK(stuck.code == cli::kNonConvergence);
}

TEST_CASE("experiment emits one row per instance") {
  const Result r = invoke({"experiment", "--grid", "2,5", "--n", "2", "--per-cell", "10", "--jobs", "1",
                           "--seed", "3"});
  REQUIRE(r.code == cli::kOk);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "classes,federations,n,instance,instance_seed,resamples,terminated,wall_time_ms,support_size,"
        "iterations,final_loss,stop_reason");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) rows += !line.empty();
  CHECK(rows == 40);
}

}  // TEST_SUITE
