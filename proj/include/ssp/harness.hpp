#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ssp/io.hpp"
#include "ssp/reference.hpp"
#include "ssp/solver.hpp"
#include "ssp/stepsize.hpp"

namespace ssp {

/// Stepsize request before parameter resolution. The alignment parameters
/// may be supplied directly; otherwise they are derived from the problem's
/// constraint matrix (spectral bounds), which needs all-affine unit rows and,
/// for the batch parameter, an enumerable (partition) support.
struct RuleSpec {
  StepsizeRule::Kind kind = StepsizeRule::Kind::fixed;
  double beta = 1.0;
  double delta = 1.0;
  double fallback_beta = 1.0;
  std::optional<double> user_alignment;
  std::optional<double> user_batch_alignment;
};

inline StepsizeRule resolve_rule(const RuleSpec& spec, const FeasibilityProblem& problem,
                                 const SamplingPlan& plan) {
  switch (spec.kind) {
    case StepsizeRule::Kind::fixed:
      return StepsizeRule::fixed(spec.beta);
    case StepsizeRule::Kind::adaptive:
      return StepsizeRule::adaptive(spec.delta, spec.fallback_beta);
    case StepsizeRule::Kind::extrapolated: {
      ExtrapolationParams params;
      if (spec.user_alignment) {
        params.alignment = *spec.user_alignment;
        params.source = ParamSource::user_supplied;
      } else {
        std::optional<Mat> a = problem.affine_matrix();
        if (!a) {
          throw ConfigError("stepsize: the alignment parameter is only derivable for "
                            "all-affine problems; supply it explicitly");
        }
        params.alignment = linear_alignment_bound(*a, plan.weights());
        params.source = ParamSource::spectral_bound;
      }
      return StepsizeRule::extrapolated(spec.delta, params);
    }
    case StepsizeRule::Kind::batch_extrapolated: {
      ExtrapolationParams params;
      if (spec.user_batch_alignment) {
        params.batch_alignment = *spec.user_batch_alignment;
        params.source = ParamSource::user_supplied;
      } else {
        std::optional<Mat> a = problem.affine_matrix();
        if (!a || plan.scheme() != Scheme::partition) {
          throw ConfigError("stepsize: the batch alignment parameter is only derivable for "
                            "all-affine problems under a partition plan; supply it "
                            "explicitly or use the extrapolated-l / adaptive rules");
        }
        params.batch_alignment = batch_alignment_bound(*a, plan.block_enumeration());
        params.source = ParamSource::exact_partition;
      }
      return StepsizeRule::batch_extrapolated(spec.delta, params);
    }
  }
  throw ConfigError("stepsize: unknown rule kind");
}

struct ExperimentOptions {
  SolverConfig config;
  bool verify_c = false;
  bool record_ref_dist = false;  // Dykstra distance to the feasible set at every record
  ReferenceConfig reference;
  std::string out_prefix;  // when nonempty, writes <prefix>.trace.csv and <prefix>.summary.json
};

struct ExperimentResult {
  ConvergenceTrace trace;
  std::string csv;
  Json summary;
};

namespace detail {

inline Json rule_to_json(const StepsizeRule& rule) {
  Json j;
  j["kind"] = rule.kind_name();
  switch (rule.kind) {
    case StepsizeRule::Kind::fixed:
      j["beta"] = rule.beta;
      break;
    case StepsizeRule::Kind::adaptive:
      j["delta"] = rule.delta;
      j["fallback_beta"] = rule.fallback_beta;
      break;
    case StepsizeRule::Kind::extrapolated:
      j["delta"] = rule.delta;
      j["alignment"] = *rule.params.alignment;
      j["source"] = to_string(rule.params.source);
      break;
    case StepsizeRule::Kind::batch_extrapolated:
      j["delta"] = rule.delta;
      j["batch_alignment"] = *rule.params.batch_alignment;
      j["source"] = to_string(rule.params.source);
      break;
  }
  return j;
}

inline Json config_to_json(const SolverConfig& config, const SamplingPlan& plan) {
  Json j;
  j["algorithm"] = to_string(config.algorithm);
  j["stepsize"] = rule_to_json(config.rule);
  j["max_iters"] = config.max_iters;
  j["stop_tol"] = config.stop_tol;
  j["seed"] = config.seed;
  j["record_every"] = config.record_every;
  j["workers"] = config.workers;
  j["record_g_exact"] = config.record_g_exact;
  j["randomize_start"] = config.randomize_start;
  j["scheme"] = to_string(plan.scheme());
  j["batch_size"] = config.algorithm == Algorithm::ssp ? 1 : plan.batch_size();
  return j;
}

inline std::optional<double> mean_lnk(const ConvergenceTrace& trace) {
  double acc = 0.0;
  long count = 0;
  for (const IterationRecord& rec : trace.records) {
    if (!rec.lnk) continue;
    acc += *rec.lnk;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return acc / count;
}

}  // namespace detail

/// Run one experiment: solve, and assemble the machine-readable summary with
/// the resolved configuration, rate fit, alignment diagnostics and (on
/// request) the empirical regularity constant. Writes the trace CSV and the
/// summary JSON when out_prefix is set.
inline ExperimentResult run_experiment(const FeasibilityProblem& problem,
                                       const ExperimentOptions& options) {
  ExperimentResult result;
  SolverConfig config = options.config;
  if (options.record_ref_dist && !config.ref_distance) {
    config.ref_distance = make_ref_distance(problem, options.reference);
  }
  result.trace = run(problem, config);
  result.csv = trace_to_csv(result.trace);

  Json& summary = result.summary;
  summary["config"] = detail::config_to_json(config, problem.plan);
  summary["config"]["record_ref_dist"] = options.record_ref_dist;
  summary["iterations"] = result.trace.iterations_run;
  summary["stop_reason"] = to_string(result.trace.stop_reason);
  summary["final_max_residual"] = problem.sweep_max_residual(result.trace.final_iterate);
  if (auto m = detail::mean_lnk(result.trace)) summary["mean_LNk"] = *m;

  if (problem.witness) {
    summary["witness_dist_sq_final"] =
        dist_sq(result.trace.final_iterate, *problem.witness);
    try {
      RateReport rate = fit_rate(result.trace);
      summary["q_hat"] = rate.q_hat;
      summary["r_squared"] = rate.r_squared;
    } catch (const Error& e) {
      summary["q_hat"] = nullptr;
      summary["rate_fit_error"] = e.what();
    }
  }
  if (options.record_ref_dist) {
    try {
      RateReport rate = fit_rate(result.trace, RateSource::reference_distance);
      summary["q_hat_ref"] = rate.q_hat;
      summary["r_squared_ref"] = rate.r_squared;
    } catch (const Error& e) {
      summary["q_hat_ref"] = nullptr;
      summary["ref_rate_fit_error"] = e.what();
    }
  }

  if (std::optional<Mat> a = problem.affine_matrix()) {
    try {
      summary["alignment_bound"] = linear_alignment_bound(*a, problem.plan.weights());
    } catch (const Error&) {
      // non-uniform weights or non-unit rows: bound not applicable
    }
    if (problem.plan.scheme() == Scheme::partition) {
      try {
        summary["batch_alignment_bound"] =
            batch_alignment_bound(*a, problem.plan.block_enumeration());
      } catch (const Error&) {
      }
    }
  }

  if (options.verify_c) {
    summary["c_hat"] = estimate_c(problem, options.reference);
    summary["c_hat_samples"] = options.reference.c_sample_points;
    summary["c_note"] =
        "empirical lower bound over seeded probes; assumes the stationary marginal "
        "sampling law";
  }

  if (!options.out_prefix.empty()) {
    write_text_file(options.out_prefix + ".trace.csv", result.csv);
    write_text_file(options.out_prefix + ".summary.json", summary.dump(2) + "\n");
  }
  return result;
}

/// Paired batch-size study on one problem: for each requested batch size,
/// run `replicates` seeded experiments (seed = base + replicate index),
/// report mean iterations to tolerance, the mean fitted decay factor, the
/// predicted stepsize denominator, and the ratio of each fit against the
/// single-sample baseline. Batch size 1 is always included as the baseline.
inline Json compare(const FeasibilityProblem& problem, std::vector<int> batch_sizes,
                    int replicates, std::uint64_t base_seed, const RuleSpec& rule_spec,
                    const SolverConfig& config_template) {
  if (replicates < 1) throw ConfigError("compare: replicates must be >= 1");
  if (std::find(batch_sizes.begin(), batch_sizes.end(), 1) == batch_sizes.end()) {
    batch_sizes.insert(batch_sizes.begin(), 1);
  }

  Json out;
  out["seed"] = base_seed;
  out["replicates"] = replicates;
  out["algorithm"] = "mssp";
  Json results = Json::array();

  std::optional<double> q1;
  for (int n : batch_sizes) {
    FeasibilityProblem variant{problem.oracles, problem.Y, problem.plan.with_batch_size(n),
                               problem.witness};
    StepsizeRule rule = resolve_rule(rule_spec, variant, variant.plan);

    double iter_sum = 0.0;
    double q_sum = 0.0, lnk_sum = 0.0;
    int q_count = 0, lnk_count = 0, unconverged = 0;
    for (int r = 0; r < replicates; ++r) {
      SolverConfig config = config_template;
      config.algorithm = Algorithm::mssp;
      config.rule = rule;
      config.seed = base_seed + static_cast<std::uint64_t>(r);
      ConvergenceTrace trace = run(variant, config);
      iter_sum += static_cast<double>(trace.iterations_run);
      if (trace.stop_reason != StopReason::tol_reached) ++unconverged;
      if (auto m = detail::mean_lnk(trace)) {
        lnk_sum += *m;
        ++lnk_count;
      }
      try {
        q_sum += fit_rate(trace).q_hat;
        ++q_count;
      } catch (const Error&) {
      }
    }

    Json entry;
    entry["batch_size"] = n;
    entry["mean_iterations"] = iter_sum / replicates;
    entry["unconverged_replicates"] = unconverged;
    entry["stepsize"] = detail::rule_to_json(rule);
    if (lnk_count > 0) entry["mean_LNk"] = lnk_sum / lnk_count;
    if (q_count > 0) {
      double q_mean = q_sum / q_count;
      entry["q_hat"] = q_mean;
      entry["fitted_replicates"] = q_count;
      if (n == 1) q1 = q_mean;
      if (q1) entry["q_hat_ratio_vs_single"] = q_mean / *q1;
    } else {
      entry["q_hat"] = nullptr;
    }
    // rate-denominator prediction from the spectral bounds, independent of
    // the rule actually run: the batch bound when the support is enumerable,
    // the 1/N + (1 - 1/N) L combination otherwise
    if (std::optional<Mat> a = variant.affine_matrix()) {
      try {
        if (variant.plan.scheme() == Scheme::partition) {
          entry["predicted_denominator"] =
              batch_alignment_bound(*a, variant.plan.block_enumeration());
        } else {
          double inv_n = 1.0 / n;
          entry["predicted_denominator"] =
              inv_n + (1.0 - inv_n) * linear_alignment_bound(*a, variant.plan.weights());
        }
      } catch (const Error&) {
        // non-unit rows or non-uniform weights: no prediction
      }
    }
    results.push_back(std::move(entry));
  }
  out["results"] = std::move(results);
  return out;
}

}  // namespace ssp
