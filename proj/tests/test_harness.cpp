#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "ssp/harness.hpp"
#include "ssp/problem_gen.hpp"

using namespace ssp;

namespace {

// parse one CSV column (by index) into doubles, skipping empty cells
std::vector<double> csv_column(const std::string& csv, int column) {
  std::vector<double> out;
  std::size_t pos = csv.find('\n') + 1;  // skip header
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    std::string line = csv.substr(pos, end - pos);
    pos = end + 1;
    int col = 0;
    std::size_t cell_start = 0;
    while (col <= column) {
      std::size_t comma = line.find(',', cell_start);
      std::string cell = line.substr(cell_start, comma - cell_start);
      if (col == column && !cell.empty()) {
        out.push_back(std::strtod(cell.c_str(), nullptr));
      }
      if (comma == std::string::npos) break;
      cell_start = comma + 1;
      ++col;
    }
  }
  return out;
}

constexpr int kBetaCol = 1;
constexpr int kLnkCol = 2;
constexpr int kWitnessCol = 4;

}  // namespace

TEST_CASE("run_experiment: witness column decreases monotonically for ssp") {
  FeasibilityProblem problem = gen_linear(10, 40, Conditioning::generic, 0.0, 2021);
  ExperimentOptions options;
  options.config.algorithm = Algorithm::ssp;
  options.config.rule = StepsizeRule::fixed(1.0);
  options.config.seed = 13;
  options.config.max_iters = 3000;
  options.config.stop_tol = 0.0;

  ExperimentResult result = run_experiment(problem, options);
  std::vector<double> witness = csv_column(result.csv, kWitnessCol);
  REQUIRE(witness.size() > 100);
  for (std::size_t i = 1; i < witness.size(); ++i) {
    CHECK(witness[i] <= witness[i - 1] + 1e-10);
  }
  CHECK(result.summary["config"]["seed"] == 13);
  CHECK(result.summary.contains("alignment_bound"));
}

TEST_CASE("run_experiment: batch-1 fixed rule reproduces the ssp trace") {
  FeasibilityProblem problem = gen_linear(8, 20, Conditioning::generic, 0.05, 3033);
  ExperimentOptions ssp_options;
  ssp_options.config.algorithm = Algorithm::ssp;
  ssp_options.config.rule = StepsizeRule::fixed(1.0);
  ssp_options.config.seed = 7;
  ssp_options.config.max_iters = 20000;

  ExperimentOptions mssp_options = ssp_options;
  mssp_options.config.algorithm = Algorithm::mssp;

  ExperimentResult a = run_experiment(problem, ssp_options);
  ExperimentResult b = run_experiment(problem, mssp_options);
  CHECK(a.csv == b.csv);
  CHECK(a.trace.final_iterate == b.trace.final_iterate);
}

TEST_CASE("run_experiment: adaptive rule keeps beta * LNk constant") {
  FeasibilityProblem problem = gen_linear(10, 30, Conditioning::generic, 0.0, 505);
  FeasibilityProblem batched{problem.oracles, problem.Y, problem.plan.with_batch_size(5),
                             problem.witness};
  ExperimentOptions options;
  options.config.algorithm = Algorithm::mssp;
  options.config.rule = StepsizeRule::adaptive(1.0);
  options.config.seed = 3;
  options.config.max_iters = 500;
  options.config.stop_tol = 0.0;

  ExperimentResult result = run_experiment(batched, options);
  std::vector<double> betas = csv_column(result.csv, kBetaCol);
  std::vector<double> lnks = csv_column(result.csv, kLnkCol);
  REQUIRE(betas.size() == lnks.size());
  int checked = 0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (lnks[i] <= 0.0) continue;
    CHECK(std::abs(betas[i] * lnks[i] - 1.0) <= 1e-12);  // 2 - delta with delta = 1
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("run_experiment: verify-c embeds the estimate") {
  FeasibilityProblem problem = gen_linear(5, 12, Conditioning::generic, 0.3, 610);
  ExperimentOptions options;
  options.config.algorithm = Algorithm::ssp;
  options.config.rule = StepsizeRule::fixed(1.0);
  options.config.max_iters = 20000;
  options.verify_c = true;
  options.reference.c_sample_points = 100;

  ExperimentResult result = run_experiment(problem, options);
  REQUIRE(result.summary.contains("c_hat"));
  double mg = problem.subgradient_bound();
  CHECK(result.summary["c_hat"].get<double>() * mg * mg >= 1.0 - 1e-6);
}

TEST_CASE("resolve_rule: derivations and failure modes") {
  FeasibilityProblem problem = gen_linear(6, 12, Conditioning::generic, 0.1, 44);

  RuleSpec extrapolated;
  extrapolated.kind = StepsizeRule::Kind::extrapolated;
  StepsizeRule rule = resolve_rule(extrapolated, problem, problem.plan);
  CHECK(rule.params.source == ParamSource::spectral_bound);
  CHECK(*rule.params.alignment > 0.0);
  CHECK(*rule.params.alignment < 1.0);

  RuleSpec batch;
  batch.kind = StepsizeRule::Kind::batch_extrapolated;
  CHECK_THROWS_AS(resolve_rule(batch, problem, problem.plan), ConfigError);  // iid support

  batch.user_batch_alignment = 0.5;
  StepsizeRule supplied = resolve_rule(batch, problem, problem.plan);
  CHECK(supplied.params.source == ParamSource::user_supplied);

  FeasibilityProblem balls = gen_ball_intersection(4, 6, 5);
  RuleSpec for_balls;
  for_balls.kind = StepsizeRule::Kind::extrapolated;
  CHECK_THROWS_AS(resolve_rule(for_balls, balls, balls.plan), ConfigError);  // not affine
}

TEST_CASE("compare: deterministic for equal seeds and monotone for orthogonal blocks") {
  FeasibilityProblem problem = gen_linear(16, 16, Conditioning::orthogonalized, 0.0, 5150);
  // partition support so the batch alignment parameter is enumerable
  FeasibilityProblem partitioned{problem.oracles, problem.Y,
                                 SamplingPlan::partition(problem.plan.weights(),
                                                         {{0, 1, 2, 3}, {4, 5, 6, 7},
                                                          {8, 9, 10, 11}, {12, 13, 14, 15}}),
                                 problem.witness};
  RuleSpec rule;
  rule.kind = StepsizeRule::Kind::batch_extrapolated;
  rule.delta = 1.0;

  SolverConfig config;
  config.max_iters = 100000;
  config.stop_tol = 1e-9;

  Json a = compare(partitioned, {1, 4}, 3, 17, rule, config);
  Json b = compare(partitioned, {1, 4}, 3, 17, rule, config);
  CHECK(a == b);

  REQUIRE(a["results"].size() == 2);
  CHECK(a["results"][0]["batch_size"] == 1);
  CHECK(a["results"][1]["batch_size"] == 4);
  double iters_1 = a["results"][0]["mean_iterations"].get<double>();
  double iters_4 = a["results"][1]["mean_iterations"].get<double>();
  CHECK(iters_4 < iters_1);  // orthonormal blocks: genuine minibatch gain
  CHECK(a["results"][1]["predicted_denominator"].get<double>() ==
        doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("run_experiment writes trace and summary files") {
  FeasibilityProblem problem = gen_linear(5, 10, Conditioning::generic, 0.2, 7);
  ExperimentOptions options;
  options.config.algorithm = Algorithm::ssp;
  options.config.rule = StepsizeRule::fixed(1.0);
  options.config.max_iters = 10000;
  options.out_prefix = "harness_test_out";

  ExperimentResult result = run_experiment(problem, options);
  std::ifstream csv("harness_test_out.trace.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "k,beta_k,LNk,max_residual,witness_dist_sq,G_exact");

  std::ifstream summary_file("harness_test_out.summary.json");
  REQUIRE(summary_file.good());
  Json summary;
  summary_file >> summary;
  CHECK(summary["stop_reason"] == result.summary["stop_reason"]);
  std::remove("harness_test_out.trace.csv");
  std::remove("harness_test_out.summary.json");
}
