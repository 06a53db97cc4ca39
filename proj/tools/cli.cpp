#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedasm/laminar_selection.hpp"
#include "fedasm/optimizer.hpp"
#include "fedasm/priority_selection.hpp"
#include "fedasm/rounding.hpp"
#include "fedasm/semilaminar_selection.hpp"
#include "fedasm/serialization.hpp"
#include "fedasm/verifier.hpp"

namespace fedasm::cli {

namespace {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Diagnostic {
  int code;
  Json body;
};

Diagnostic diagnose(const std::exception_ptr& ep) {
  auto make = [](int code, const char* kind, const std::exception& e) {
    return Diagnostic{code, Json{{"error", kind}, {"message", e.what()}}};
  };
  try {
    std::rethrow_exception(ep);
  } catch (const fedasm::ParseError& e) {
    Diagnostic d = make(kInvalidInstance, "parse_error", e);
    d.body["location"] = e.location();
    return d;
  } catch (const InvalidInstance& e) {
    Diagnostic d = make(kInvalidInstance, "invalid_instance", e);
    d.body["issues"] = Json::array();
    for (const auto& issue : e.report().issues) {
      d.body["issues"].push_back({{"kind", to_string(issue.kind)},
                                  {"error", issue.is_error},
                                  {"subject", issue.subject},
                                  {"message", issue.message}});
    }
    return d;
  } catch (const RestartsExhausted& e) {
    Diagnostic d = make(kPrecondition, "restarts_exhausted", e);
    d.body["failures"] = e.failures;
    return d;
  } catch (const PreconditionError& e) {
    return make(kPrecondition, "precondition_refused", e);
  } catch (const SamplingInfeasible& e) {
    return make(kPrecondition, "sampling_infeasible", e);
  } catch (const ExPostInfeasible& e) {
    return make(kPrecondition, "ex_post_infeasible", e);
  } catch (const NonConvergence& e) {
    Diagnostic d = make(kNonConvergence, "non_convergence", e);
    d.body["iterations"] = e.result.trace.size();
    d.body["columns"] = e.result.columns;
    d.body["max_seat_deviation"] = e.result.deviation.max_seat_deviation;
    d.body["max_overlap_shortfall"] = e.result.deviation.max_overlap_shortfall;
    return d;
  } catch (const SearchLimitExceeded& e) {
    return make(kNonConvergence, "search_limit", e);
  } catch (const RestrictedSolveError& e) {
    Diagnostic d = make(kNonConvergence, "restricted_master", e);
    d.body["gradient_norm"] = e.gradient_norm;
    return d;
  } catch (const IoError& e) {
    return make(kIo, "io_error", e);
  } catch (const std::exception& e) {
    return make(kInternal, "internal_error", e);
  }
}

std::string slurp(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

void emit(const std::string& path, std::string_view contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
    return;
  }
  try {
    write_file(path, contents);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream s;
  s.precision(17);
  s << "iteration,support_size,loss,wall_time_ms\n";
  for (const auto& row : trace) {
    s << row.iteration << ',' << row.support_size << ',' << row.loss << ',' << row.wall_time_ms << '\n';
  }
  return s.str();
}

unsigned default_jobs() {
  if (const char* env = std::getenv("FEDASM_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

bool populations_reach(const Instance& inst, std::int64_t n) {
  for (std::size_t v = 0; v < inst.num_nodes(); ++v) {
    if (inst.population(node_id(v)) < n) return false;
  }
  return true;
}

Selector make_selector(const Instance& inst, const std::string& algo, std::int64_t n,
                       std::int64_t max_attempts, const std::optional<RandomizedAssignment>& randomized) {
  if (algo == "priority") return [&inst, n](Rng& rng) { return select_priority(inst, n, rng); };
  if (algo == "priority-restart") {
    return [&inst, n, max_attempts](Rng& rng) { return select_priority_with_restart(inst, n, rng, max_attempts); };
  }
  // The structured selectors check their preconditions here, so a refusal
  // surfaces before any trial runs.
  if (algo == "laminar") return LaminarSelector(inst, n);
  if (algo == "semilaminar") return SemiLaminarSelector(inst, n);
  if (algo == "randomized") {
    if (!randomized) throw PreconditionError("--algo randomized needs --randomized <file>");
    RandomizedAssignment r = *randomized;
    return [&inst, r](Rng& rng) { return sample_from_randomized(inst, r, rng); };
  }
  throw PreconditionError("unknown algorithm '" + algo + "'");
}

struct ExperimentRow {
  std::int64_t classes = 0;
  std::int64_t federations = 0;
  std::int64_t n = 0;
  std::int64_t index = 0;
  std::uint64_t instance_seed = 0;
  std::int64_t resamples = 0;
  bool terminated = false;
  double wall_time_ms = 0;
  std::size_t support_size = 0;
  std::size_t iterations = 0;
  double final_loss = 0;
  std::string stop_reason;
};

struct ExperimentJob {
  std::int64_t classes;
  std::int64_t federations;
  std::int64_t n;
  std::int64_t index;
  std::uint64_t stream;
};

ExperimentRow run_experiment_job(const ExperimentJob& job, std::uint64_t master_seed,
                                 const ColumnGenerationOptions& options) {
  ExperimentRow row;
  row.classes = job.classes;
  row.federations = job.federations;
  row.n = job.n;
  row.index = job.index;
  Rng seeds = Rng::for_stream(master_seed, job.stream);
  std::optional<Instance> inst;
  for (std::int64_t attempt = 0; attempt < 1000; ++attempt) {
    row.instance_seed = seeds();
    Instance candidate = generate_instance(static_cast<std::size_t>(job.classes),
                                           static_cast<std::size_t>(job.federations), row.instance_seed);
    if (populations_reach(candidate, job.n)) {
      inst.emplace(std::move(candidate));
      break;
    }
    ++row.resamples;
  }
  if (!inst) {
    row.stop_reason = "no instance with every population at least n";
    return row;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    const ColumnGenerationResult result = run_column_generation(*inst, job.n, options);
    row.terminated = result.converged;
    row.support_size = result.columns;
    row.iterations = result.trace.size();
    row.final_loss = result.trace.empty() ? 0.0 : result.trace.back().loss;
    row.stop_reason = result.stop_reason;
  } catch (const std::exception& e) {
    row.stop_reason = e.what();
  }
  row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated assembly selection and verification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fedasm 0.1.0");

  // generate
  std::int64_t gen_classes = 5;
  std::int64_t gen_federations = 5;
  std::uint64_t gen_seed = 0;
  double gen_mean = 100.0;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Generate a random instance");
  generate->add_option("--classes", gen_classes, "Number of equivalence classes (one leaf each)")->check(CLI::PositiveNumber);
  generate->add_option("--federations", gen_federations, "Number of federations")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--mean-size", gen_mean, "Mean class size")->check(CLI::PositiveNumber);
  generate->add_option("-o,--out", gen_out, "Output path (default: stdout)");

  // validate
  std::string val_instance;
  std::optional<std::int64_t> val_n;
  auto* validate_cmd = app.add_subcommand("validate", "Validate and classify an instance");
  validate_cmd->add_option("instance", val_instance, "Instance JSON")->required();
  validate_cmd->add_option("--n", val_n, "Assembly size to check populations against");

  // select
  std::string sel_instance;
  std::string sel_algo;
  std::int64_t sel_n = 0;
  std::uint64_t sel_seed = 0;
  std::int64_t sel_attempts = 1000;
  std::string sel_out;
  auto* select = app.add_subcommand("select", "Draw one assembly assignment");
  select->add_option("instance", sel_instance, "Instance JSON")->required();
  select->add_option("--algo", sel_algo, "priority | laminar | semilaminar")
      ->required()
      ->check(CLI::IsMember({"priority", "laminar", "semilaminar"}));
  select->add_option("--n", sel_n, "Assembly size")->required()->check(CLI::PositiveNumber);
  select->add_option("--seed", sel_seed, "Random seed");
  select->add_option("--max-attempts", sel_attempts, "Restarts allowed for priority selection")
      ->check(CLI::PositiveNumber);
  select->add_option("-o,--out", sel_out, "Output path (default: stdout)");

  // verify
  std::string ver_instance;
  std::string ver_algo;
  std::string ver_randomized;
  std::int64_t ver_n = 0;
  std::int64_t ver_trials = 10'000;
  std::uint64_t ver_seed = 0;
  double ver_sigmas = 4.0;
  unsigned ver_threads = default_jobs();
  std::int64_t ver_attempts = 1000;
  std::string ver_json;
  std::string ver_csv;
  auto* verify = app.add_subcommand("verify", "Monte Carlo verification of a selection algorithm");
  verify->add_option("instance", ver_instance, "Instance JSON")->required();
  verify->add_option("--algo", ver_algo, "priority | priority-restart | laminar | semilaminar | randomized")
      ->required()
      ->check(CLI::IsMember({"priority", "priority-restart", "laminar", "semilaminar", "randomized"}));
  verify->add_option("--randomized", ver_randomized, "Randomized assignment JSON for --algo randomized");
  verify->add_option("--n", ver_n, "Assembly size (default: from --randomized)")->check(CLI::PositiveNumber);
  verify->add_option("--trials", ver_trials, "Number of draws")->check(CLI::PositiveNumber);
  verify->add_option("--seed", ver_seed, "Master seed");
  verify->add_option("--sigmas", ver_sigmas, "Band width in standard errors")->check(CLI::PositiveNumber);
  verify->add_option("--threads", ver_threads, "Worker threads (default: $FEDASM_JOBS or all cores)")
      ->check(CLI::PositiveNumber);
  verify->add_option("--max-attempts", ver_attempts, "Restarts allowed for priority-restart")
      ->check(CLI::PositiveNumber);
  verify->add_option("--json", ver_json, "Report JSON path (default: stdout)");
  verify->add_option("--csv", ver_csv, "Per-statistic CSV path");

  // optimize
  std::string opt_instance;
  std::int64_t opt_n = 0;
  double opt_tolerance = 0.001;
  std::int64_t opt_iters = 1000;
  std::string opt_out;
  std::string opt_trace;
  auto* optimize = app.add_subcommand("optimize", "Column generation for a randomized assignment");
  optimize->add_option("instance", opt_instance, "Instance JSON")->required();
  optimize->add_option("--n", opt_n, "Assembly size")->required()->check(CLI::PositiveNumber);
  optimize->add_option("--tolerance", opt_tolerance, "Allowed deviation as a fraction of n")
      ->check(CLI::PositiveNumber);
  optimize->add_option("--max-iters", opt_iters, "Iteration cap")->check(CLI::PositiveNumber);
  optimize->add_option("-o,--out", opt_out, "Randomized assignment path (default: stdout)");
  optimize->add_option("--trace", opt_trace, "Trace CSV path");

  // experiment
  std::vector<std::int64_t> exp_grid{2, 5, 10, 20};
  std::vector<std::int64_t> exp_n{5};
  std::int64_t exp_per_cell = 100;
  std::uint64_t exp_seed = 0;
  unsigned exp_jobs = default_jobs();
  bool exp_fail_fast = false;
  double exp_tolerance = 0.001;
  std::int64_t exp_iters = 1000;
  std::string exp_out;
  auto* experiment = app.add_subcommand("experiment", "Column generation sweep over generated instances");
  experiment->add_option("--grid", exp_grid, "Values used for both class and federation counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  experiment->add_option("--n", exp_n, "Assembly sizes")->delimiter(',')->check(CLI::PositiveNumber);
  experiment->add_option("--per-cell", exp_per_cell, "Instances per grid cell")->check(CLI::PositiveNumber);
  experiment->add_option("--seed", exp_seed, "Master seed");
  experiment->add_option("--jobs", exp_jobs, "Concurrent instances (default: $FEDASM_JOBS or all cores)")
      ->check(CLI::PositiveNumber);
  experiment->add_flag("--fail-fast", exp_fail_fast, "Stop at the first instance that does not converge");
  experiment->add_option("--tolerance", exp_tolerance, "Allowed deviation as a fraction of n")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--max-iters", exp_iters, "Iteration cap per instance")->check(CLI::PositiveNumber);
  experiment->add_option("-o,--out", exp_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) {
      GeneratorOptions g;
      g.mean_class_size = gen_mean;
      const Instance inst = generate_instance(static_cast<std::size_t>(gen_classes),
                                              static_cast<std::size_t>(gen_federations), gen_seed, g);
      emit(gen_out, serialize_instance(inst), out);
      return kOk;
    }

    if (*validate_cmd) {
      const InstanceSpec spec = parse_instance_spec(slurp(val_instance));
      const ValidationReport report = validate(spec, val_n);
      Json body;
      body["valid"] = report.ok();
      body["issues"] = Json::array();
      for (const auto& issue : report.issues) {
        body["issues"].push_back({{"kind", to_string(issue.kind)},
                                  {"error", issue.is_error},
                                  {"subject", issue.subject},
                                  {"message", issue.message}});
      }
      if (report.ok()) {
        const Instance inst = Instance::build(spec);
        body["kind"] = to_string(classify(inst).kind);
        body["nodes"] = inst.num_nodes();
        body["classes"] = inst.num_classes();
        body["population"] = inst.total_population();
      }
      out << body.dump(2) << '\n';
      return report.ok() ? kOk : kInvalidInstance;
    }

    if (*select) {
      const Instance inst = parse_instance(slurp(sel_instance));
      Rng rng(sel_seed);
      AssemblyAssignment a;
      if (sel_algo == "priority") {
        a = select_priority_with_restart(inst, sel_n, rng, sel_attempts);
      } else if (sel_algo == "laminar") {
        a = select_laminar(inst, sel_n, rng);
      } else {
        a = select_semilaminar(inst, sel_n, rng);
      }
      emit(sel_out, serialize_assignment(inst, a), out);
      return kOk;
    }

    if (*verify) {
      const Instance inst = parse_instance(slurp(ver_instance));
      std::optional<RandomizedAssignment> randomized;
      if (!ver_randomized.empty()) {
        randomized = parse_randomized(slurp(ver_randomized), inst);
        if (ver_n == 0) ver_n = randomized->n;
      }
      if (ver_n == 0) throw PreconditionError("--n is required");
      MonteCarloOptions mc;
      mc.trials = ver_trials;
      mc.seed = ver_seed;
      mc.sigmas = ver_sigmas;
      mc.threads = ver_threads;
      if (ver_algo == "semilaminar") {
        const Classification cls = classify(inst);
        if (cls.semilaminar) mc.slack = semilaminar_slack(inst, *cls.semilaminar);
      }
      const Selector selector = make_selector(inst, ver_algo, ver_n, ver_attempts, randomized);
      const VerificationReport report = monte_carlo_ex_ante(selector, inst, ver_n, mc);
      emit(ver_json, report_json(inst, report), out);
      if (!ver_csv.empty()) emit(ver_csv, report_csv(inst, report), out);
      return kOk;
    }

    if (*optimize) {
      const Instance inst = parse_instance(slurp(opt_instance));
      ColumnGenerationOptions options;
      options.tolerance = opt_tolerance;
      options.max_iterations = opt_iters;
      const ColumnGenerationResult result = run_column_generation(inst, opt_n, options);
      if (!opt_trace.empty()) emit(opt_trace, trace_csv(result.trace), out);
      if (!result.converged) throw NonConvergence(result);
      emit(opt_out, serialize_randomized(inst, result.randomized), out);
      return kOk;
    }

    if (*experiment) {
      std::vector<ExperimentJob> jobs;
      std::uint64_t stream = 0;
      for (std::int64_t c : exp_grid) {
        for (std::int64_t f : exp_grid) {
          for (std::int64_t n : exp_n) {
            for (std::int64_t k = 0; k < exp_per_cell; ++k) jobs.push_back({c, f, n, k, stream++});
          }
        }
      }
      ColumnGenerationOptions options;
      options.tolerance = exp_tolerance;
      options.max_iterations = exp_iters;
      std::vector<std::optional<ExperimentRow>> rows(jobs.size());
      std::atomic<std::size_t> next{0};
      std::atomic<bool> abort{false};
      {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < std::max(1u, exp_jobs); ++w) {
          workers.emplace_back([&] {
            for (;;) {
              if (abort.load()) return;
              const std::size_t i = next.fetch_add(1);
              if (i >= jobs.size()) return;
              rows[i] = run_experiment_job(jobs[i], exp_seed, options);
              if (exp_fail_fast && !rows[i]->terminated) abort.store(true);
            }
          });
        }
      }
      std::ostringstream csv;
      csv.precision(17);
      csv << "classes,federations,n,instance,instance_seed,resamples,terminated,wall_time_ms,support_size,"
             "iterations,final_loss,stop_reason\n";
      std::int64_t failures = 0;
      for (const auto& row : rows) {
        if (!row) continue;
        failures += !row->terminated;
        csv << row->classes << ',' << row->federations << ',' << row->n << ',' << row->index << ','
            << row->instance_seed << ',' << row->resamples << ',' << (row->terminated ? "true" : "false") << ','
            << row->wall_time_ms << ',' << row->support_size << ',' << row->iterations << ','
            << row->final_loss << ',' << csv_field(row->stop_reason) << '\n';
      }
      emit(exp_out, csv.str(), out);
      if (exp_fail_fast && failures > 0) {
        err << Json{{"error", "non_convergence"},
                    {"message", "experiment stopped at the first instance that did not converge"}}
                   .dump()
            << '\n';
        return kNonConvergence;
      }
      return kOk;
    }
  } catch (...) {
    const Diagnostic d = diagnose(std::current_exception());
    err << d.body.dump() << '\n';
    return d.code;
  }
  return kUsage;
}

}  // namespace fedasm::cli
