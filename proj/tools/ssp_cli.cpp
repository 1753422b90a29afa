// Benchmark front end: generate feasibility instances, run SSP / M-SSP
// experiments with the extrapolated stepsize strategies, and compare batch
// sizes. JSON in, CSV + JSON out.
//
// Exit codes for `run`: 0 when the tolerance was reached, 2 when the
// iteration budget ran out, 1 on any error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssp/harness.hpp"
#include "ssp/io.hpp"
#include "ssp/problem_gen.hpp"

namespace {

struct GenerateArgs {
  std::string kind = "linear";
  int n = 10;
  int p = 20;
  std::string conditioning = "generic";
  double margin = 0.0;
  std::uint64_t seed = 0;
  int batch = 1;
  std::string scheme = "iid";
  std::string out;
};

struct RunArgs {
  std::string problem_path;
  std::string algorithm = "ssp";
  std::string stepsize = "fixed";
  double beta = 1.0;
  double delta = 1.0;
  double fallback_beta = 1.0;
  double user_alignment = -1.0;
  double user_batch_alignment = -1.0;
  int batch = 0;  // 0: keep the problem's plan
  std::uint64_t seed = 0;
  long max_iters = 100000;
  double stop_tol = 1e-9;
  long record_every = 1;
  bool record_g = false;
  bool record_ref = false;
  bool randomize_start = false;
  int workers = 1;
  bool verify_c = false;
  int c_samples = 1000;
  std::string out_prefix;
};

struct CompareArgs {
  std::string problem_path;
  std::vector<int> batches = {1, 4, 16};
  int replicates = 10;
  std::uint64_t seed = 0;
  std::string stepsize = "adaptive";
  double beta = 1.0;
  double delta = 1.0;
  double fallback_beta = 1.0;
  long max_iters = 100000;
  double stop_tol = 1e-9;
  long record_every = 1;
  bool randomize_start = false;
  std::string out;
};

ssp::StepsizeRule::Kind parse_stepsize(const std::string& name) {
  if (name == "fixed") return ssp::StepsizeRule::Kind::fixed;
  if (name == "extrapolated-l") return ssp::StepsizeRule::Kind::extrapolated;
  if (name == "extrapolated-ln") return ssp::StepsizeRule::Kind::batch_extrapolated;
  if (name == "adaptive") return ssp::StepsizeRule::Kind::adaptive;
  throw ssp::ConfigError("unknown stepsize rule: " + name);
}

ssp::RuleSpec make_rule_spec(const std::string& stepsize, double beta, double delta,
                             double fallback_beta, double user_alignment,
                             double user_batch_alignment) {
  ssp::RuleSpec spec;
  spec.kind = parse_stepsize(stepsize);
  spec.beta = beta;
  spec.delta = delta;
  spec.fallback_beta = fallback_beta;
  if (user_alignment > 0) spec.user_alignment = user_alignment;
  if (user_batch_alignment > 0) spec.user_batch_alignment = user_batch_alignment;
  return spec;
}

int do_generate(const GenerateArgs& args) {
  ssp::FeasibilityProblem problem = [&] {
    if (args.kind == "linear") {
      ssp::Conditioning conditioning;
      if (args.conditioning == "orthogonalized") {
        conditioning = ssp::Conditioning::orthogonalized;
      } else if (args.conditioning == "generic") {
        conditioning = ssp::Conditioning::generic;
      } else if (args.conditioning == "duplicated-rows") {
        conditioning = ssp::Conditioning::duplicated_rows;
      } else {
        throw ssp::ConfigError("unknown conditioning: " + args.conditioning);
      }
      return ssp::gen_linear(args.n, args.p, conditioning, args.margin, args.seed);
    }
    if (args.kind == "balls") return ssp::gen_ball_intersection(args.n, args.p, args.seed);
    throw ssp::ConfigError("unknown problem kind: " + args.kind);
  }();

  if (args.scheme == "partition") {
    if (args.p % args.batch != 0) {
      throw ssp::ConfigError("partition scheme needs --batch to divide --p");
    }
    problem.plan = ssp::SamplingPlan::partition(problem.plan.weights(), [&] {
      std::vector<ssp::Minibatch> blocks;
      for (int start = 0; start < args.p; start += args.batch) {
        ssp::Minibatch b;
        for (int i = 0; i < args.batch; ++i) b.push_back(start + i);
        blocks.push_back(std::move(b));
      }
      return blocks;
    }());
  } else if (args.scheme == "without_replacement") {
    problem.plan = ssp::SamplingPlan::without_replacement(problem.plan.weights(), args.batch);
  } else if (args.scheme == "iid") {
    problem.plan = ssp::SamplingPlan::iid(problem.plan.weights(), args.batch);
  } else {
    throw ssp::ConfigError("unknown sampling scheme: " + args.scheme);
  }

  ssp::save_problem(problem, args.out);
  std::cout << "wrote " << args.out << " (dim " << problem.dim() << ", constraints "
            << problem.constraint_count() << ")\n";
  return 0;
}

int do_run(const RunArgs& args) {
  ssp::FeasibilityProblem problem = ssp::load_problem(args.problem_path);
  if (args.batch > 0) problem.plan = problem.plan.with_batch_size(args.batch);

  ssp::ExperimentOptions options;
  if (args.algorithm == "ssp") {
    options.config.algorithm = ssp::Algorithm::ssp;
  } else if (args.algorithm == "mssp") {
    options.config.algorithm = ssp::Algorithm::mssp;
  } else {
    throw ssp::ConfigError("unknown algorithm: " + args.algorithm);
  }

  ssp::RuleSpec spec = make_rule_spec(args.stepsize, args.beta, args.delta, args.fallback_beta,
                                      args.user_alignment, args.user_batch_alignment);
  options.config.rule = ssp::resolve_rule(spec, problem, problem.plan);
  options.config.max_iters = args.max_iters;
  options.config.stop_tol = args.stop_tol;
  options.config.seed = args.seed;
  options.config.record_every = args.record_every;
  options.config.record_g_exact = args.record_g;
  options.config.randomize_start = args.randomize_start;
  options.config.workers = args.workers;
  options.record_ref_dist = args.record_ref;
  options.verify_c = args.verify_c;
  options.reference.c_sample_points = args.c_samples;
  options.out_prefix = args.out_prefix;

  ssp::ExperimentResult result = ssp::run_experiment(problem, options);
  std::cout << result.summary.dump(2) << "\n";
  return result.trace.stop_reason == ssp::StopReason::tol_reached ? 0 : 2;
}

int do_compare(const CompareArgs& args) {
  ssp::FeasibilityProblem problem = ssp::load_problem(args.problem_path);
  ssp::RuleSpec spec = make_rule_spec(args.stepsize, args.beta, args.delta, args.fallback_beta,
                                      -1.0, -1.0);
  ssp::SolverConfig config;
  config.max_iters = args.max_iters;
  config.stop_tol = args.stop_tol;
  config.record_every = args.record_every;
  config.randomize_start = args.randomize_start;

  ssp::Json report =
      ssp::compare(problem, args.batches, args.replicates, args.seed, spec, config);
  if (!args.out.empty()) {
    ssp::write_text_file(args.out, report.dump(2) + "\n");
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic subgradient projection benchmark"};
  app.require_subcommand(1);

  GenerateArgs gen_args;
  CLI::App* generate = app.add_subcommand("generate", "write a seeded problem JSON");
  generate->add_option("--kind", gen_args.kind, "linear|balls");
  generate->add_option("--n", gen_args.n, "dimension");
  generate->add_option("--p", gen_args.p, "constraint count");
  generate->add_option("--conditioning", gen_args.conditioning,
                       "orthogonalized|generic|duplicated-rows");
  generate->add_option("--margin", gen_args.margin, "witness slack (>= 0)");
  generate->add_option("--seed", gen_args.seed, "generator seed");
  generate->add_option("--batch", gen_args.batch, "plan batch size");
  generate->add_option("--scheme", gen_args.scheme, "iid|without_replacement|partition");
  generate->add_option("--out", gen_args.out, "output problem JSON path")->required();

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "run one experiment on a problem file");
  run_cmd->add_option("problem", run_args.problem_path, "problem JSON path")->required();
  run_cmd->add_option("--algorithm", run_args.algorithm, "ssp|mssp");
  run_cmd->add_option("--stepsize", run_args.stepsize,
                      "fixed|extrapolated-l|extrapolated-ln|adaptive");
  run_cmd->add_option("--beta", run_args.beta, "fixed stepsize in (0,2)");
  run_cmd->add_option("--delta", run_args.delta, "extrapolation delta in (0,2)");
  run_cmd->add_option("--fallback-beta", run_args.fallback_beta,
                      "adaptive fallback stepsize in (0,2)");
  run_cmd->add_option("--L", run_args.user_alignment, "alignment parameter override");
  run_cmd->add_option("--LN", run_args.user_batch_alignment,
                      "batch alignment parameter override");
  run_cmd->add_option("--batch", run_args.batch, "re-batch the plan (0 keeps the file's)");
  run_cmd->add_option("--seed", run_args.seed, "run seed");
  run_cmd->add_option("--max-iters", run_args.max_iters, "iteration budget");
  run_cmd->add_option("--stop-tol", run_args.stop_tol, "full-sweep residual tolerance");
  run_cmd->add_option("--record-every", run_args.record_every, "record/sweep cadence");
  run_cmd->add_flag("--record-g", run_args.record_g, "record exact G at the running average");
  run_cmd->add_flag("--record-ref", run_args.record_ref,
                    "record the Dykstra distance to the feasible set (all-affine problems)");
  run_cmd->add_flag("--randomize-start", run_args.randomize_start, "seeded Gaussian start");
  run_cmd->add_option("--workers", run_args.workers, "batch evaluation threads");
  run_cmd->add_flag("--verify-c", run_args.verify_c,
                    "estimate the regularity constant (all-affine problems)");
  run_cmd->add_option("--c-samples", run_args.c_samples, "probe count for --verify-c");
  run_cmd->add_option("--out-prefix", run_args.out_prefix,
                      "write <prefix>.trace.csv and <prefix>.summary.json");

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand("compare", "paired batch-size study");
  cmp->add_option("problem", cmp_args.problem_path, "problem JSON path")->required();
  cmp->add_option("--batches", cmp_args.batches, "batch sizes to compare")->delimiter(',');
  cmp->add_option("--replicates", cmp_args.replicates, "seeded replicates per batch size");
  cmp->add_option("--seed", cmp_args.seed, "base seed (replicate r uses seed + r)");
  cmp->add_option("--stepsize", cmp_args.stepsize,
                  "fixed|extrapolated-l|extrapolated-ln|adaptive");
  cmp->add_option("--beta", cmp_args.beta, "fixed stepsize");
  cmp->add_option("--delta", cmp_args.delta, "extrapolation delta");
  cmp->add_option("--fallback-beta", cmp_args.fallback_beta, "adaptive fallback stepsize");
  cmp->add_option("--max-iters", cmp_args.max_iters, "iteration budget per run");
  cmp->add_option("--stop-tol", cmp_args.stop_tol, "full-sweep residual tolerance");
  cmp->add_option("--record-every", cmp_args.record_every, "record/sweep cadence");
  cmp->add_flag("--randomize-start", cmp_args.randomize_start, "seeded Gaussian starts");
  cmp->add_option("--out", cmp_args.out, "write the comparison JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return do_generate(gen_args);
    if (run_cmd->parsed()) return do_run(run_args);
    if (cmp->parsed()) return do_compare(cmp_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
