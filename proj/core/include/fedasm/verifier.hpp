#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fedasm/assignment.hpp"
#include "fedasm/instance.hpp"
#include "fedasm/random.hpp"
#include "fedasm/rounding.hpp"

namespace fedasm {

struct ExPostViolation {
  std::int64_t draw = 0;
  std::string constraint;  // "size:v", "member:v", "duplicate:v", "inheritance:v", "overlap:f->c"
  std::int64_t observed = 0;
  std::int64_t required = 0;
};

/// Sizes, membership validity, duplicates, inheritance and overlap floors.
/// `slack[e]` lowers the floor of edge e (instance.edges() order); empty
/// means no slack. Never throws.
std::vector<ExPostViolation> check_ex_post(const Instance& instance, const AssemblyAssignment& a,
                                           std::int64_t n, std::span<const std::int64_t> slack = {},
                                           std::int64_t draw = 0);

using Selector = std::function<AssemblyAssignment(Rng&)>;

struct MonteCarloOptions {
  std::int64_t trials = 10'000;
  std::uint64_t seed = 0;
  double sigmas = 4.0;
  unsigned threads = 1;
  bool check_ex_post = true;
  std::vector<std::int64_t> slack;  // per edge, see check_ex_post
  std::size_t max_recorded_violations = 100;
};

/// Selection frequency of a node's class, estimated at class level: the mean
/// over trials of (seats of the class) / |C^L|. The band is sigmas times the
/// standard error from the sample deviation; a zero deviation compares exactly.
struct ClassFrequency {
  NodeId node;
  ClassId cls;
  double frequency = 0;
  double target = 0;  // n / |N_v|
  double band = 0;
  bool within = false;
};

/// Selection frequency of one tracked person with a binomial band
/// sigmas * sqrt(p (1 - p) / M) around the target p.
struct PersonFrequency {
  NodeId node;
  Member member;
  double frequency = 0;
  double target = 0;
  double band = 0;
  bool within = false;
};

struct OverlapStatistic {
  Edge edge;
  double mean = 0;
  double sd = 0;
  double quota_target = 0;  // n q_{c,f}
  double full_share = 0;    // n |N_c| / |N_f|
  double band = 0;          // sigmas * sd / sqrt(M)
  bool meets_quota = false; // mean >= quota_target - band
};

struct VerificationReport {
  std::int64_t n = 0;
  std::int64_t trials = 0;
  std::int64_t successful_trials = 0;
  std::uint64_t seed = 0;
  double sigmas = 4.0;
  std::int64_t selector_failures = 0;
  std::int64_t ex_post_violation_count = 0;
  std::vector<ExPostViolation> ex_post_violations;  // first few only
  std::vector<ClassFrequency> class_frequencies;
  std::vector<PersonFrequency> person_frequencies;
  std::vector<OverlapStatistic> overlaps;

  bool individual_ok() const;
  bool ex_ante_ok() const;
  bool ex_post_ok() const { return ex_post_violation_count == 0; }
};

/// Runs the selector once per trial with Rng::for_stream(seed, trial) and
/// aggregates integer counts, so the report does not depend on `threads`.
/// Selector exceptions count as failures and are otherwise skipped.
VerificationReport monte_carlo_ex_ante(const Selector& selector, const Instance& instance,
                                       std::int64_t n, const MonteCarloOptions& options);

std::string report_json(const Instance& instance, const VerificationReport& report);

/// One row per statistic: kind,subject,value,target,band,ok
std::string report_csv(const Instance& instance, const VerificationReport& report);

struct RoundingCheck {
  bool passed = false;
  bool rejected = false;  // the family is not a bihierarchy
  std::string detail;     // first counterexample when not passed
};

/// Exact law of round_bihierarchy: probabilities sum to one, every outcome
/// respects the requested sides, and expectations equal the marginals.
RoundingCheck exact_rounding_check(const RoundingProblem& problem, std::size_t max_dimension = 12);

/// Same checks for round_fixed_sum.
RoundingCheck exact_fixed_sum_check(std::span<const Rational> marginals,
                                    std::size_t max_dimension = 12);

}  // namespace fedasm
