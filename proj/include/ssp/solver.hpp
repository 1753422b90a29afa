#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ssp/problem.hpp"
#include "ssp/stepsize.hpp"

namespace ssp {

enum class Algorithm { ssp, mssp };

enum class StopReason { tol_reached, max_iters };

inline std::string to_string(StopReason r) {
  return r == StopReason::tol_reached ? "tol-reached" : "max-iters";
}

inline std::string to_string(Algorithm a) { return a == Algorithm::ssp ? "ssp" : "mssp"; }

struct SolverConfig {
  Algorithm algorithm = Algorithm::ssp;
  StepsizeRule rule = StepsizeRule::fixed(1.0);
  long max_iters = 100000;
  double stop_tol = 1e-9;
  std::uint64_t seed = 0;
  long record_every = 1;
  bool record_g_exact = false;   // G at the running average; costs O(p) per record
  int workers = 1;               // batch evaluation threads; traces are worker-independent
  std::optional<Vec> start;      // projected onto Y; origin when absent
  bool randomize_start = false;  // seeded Gaussian start instead of the origin

  // optional distance-to-feasible-set diagnostic, evaluated at every record;
  // kept separate from the witness distance, which only upper-bounds it
  std::function<double(const Vec&)> ref_distance;

  void validate() const {
    if (max_iters < 1) throw ConfigError("config: max_iters must be >= 1");
    if (stop_tol < 0) throw ConfigError("config: stop_tol must be >= 0");
    if (record_every < 1) throw ConfigError("config: record_every must be >= 1");
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
  }
};

/// One row of a convergence trace. Transition rows describe the update taken
/// from iterate k and carry the batch; rows written at termination have no
/// batch and carry the full-sweep residual instead of the batch residual.
struct IterationRecord {
  long k = 0;
  std::optional<double> beta_k;
  std::optional<double> lnk;  // online batch alignment at iterate k
  Minibatch batch;
  double max_residual = 0.0;
  std::optional<double> witness_dist_sq;  // ||x_k - witness||^2, an upper bound on dist^2
  std::optional<double> g_exact;          // exact mean violation at the running average
  std::optional<double> ref_dist_sq;      // squared reference distance to the feasible set
};

struct ConvergenceTrace {
  std::vector<IterationRecord> records;
  Vec averaged_iterate;  // mean of x_0 ... x_{K-1}
  Vec final_iterate;
  long iterations_run = 0;
  StopReason stop_reason = StopReason::max_iters;
};

struct RateReport {
  double q_hat = 1.0;
  double r_squared = 0.0;
};

namespace detail {

/// Evaluate a batch of constraints into slots fixed by batch position.
/// Chunked across threads when workers > 1; slot order makes the result
/// independent of scheduling, so traces do not depend on the worker count.
inline std::vector<EvalResult> evaluate_batch(const FeasibilityProblem& problem, const Vec& x,
                                              const Minibatch& batch, int workers) {
  check_same_dim(x.size(), std::size_t(problem.dim()), "evaluate_batch");
  for (int idx : batch) {
    if (idx < 0 || idx >= problem.constraint_count()) {
      throw ConfigError("evaluate_batch: constraint index out of range");
    }
  }
  const int n = static_cast<int>(batch.size());
  std::vector<EvalResult> evals(n);
  auto eval_range = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) evals[i] = problem.oracles[batch[i]].evaluate(x);
  };
  if (workers <= 1 || n < 2) {
    eval_range(0, n);
    return evals;
  }
  const int used = std::min(workers, n);
  std::vector<std::thread> threads;
  threads.reserve(used - 1);
  const int chunk = (n + used - 1) / used;
  for (int t = 1; t < used; ++t) {
    int lo = t * chunk;
    int hi = std::min(n, lo + chunk);
    if (lo < hi) threads.emplace_back(eval_range, lo, hi);
  }
  eval_range(0, std::min(chunk, n));
  for (std::thread& th : threads) th.join();
  return evals;
}

struct StepOutcome {
  Vec x_next;
  double beta = 0.0;
  double lnk = 0.0;
  double batch_max_residual = 0.0;
};

/// The minibatch update from iterate x: evaluate the batch, resolve the
/// stepsize, displace once per constraint, average in batch order and project
/// onto Y. The fixed summation order keeps runs bitwise reproducible.
inline StepOutcome minibatch_step(const FeasibilityProblem& problem, const Vec& x,
                                  const Minibatch& batch, const StepsizeRule& rule,
                                  int workers) {
  std::vector<EvalResult> evals = evaluate_batch(problem, x, batch, workers);
  const double n = static_cast<double>(batch.size());

  StepOutcome out;
  out.lnk = batch_alignment(evals);
  out.beta = resolve_beta(rule, static_cast<int>(batch.size()), out.lnk);
  for (const EvalResult& ev : evals) {
    out.batch_max_residual = std::max(out.batch_max_residual, ev.positive_part);
  }

  Vec mean(x.size(), 0.0);
  for (const EvalResult& ev : evals) {
    Vec z = ConstraintOracle::displaced(x, ev, out.beta);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += z[i];
  }
  for (double& v : mean) v /= n;
  out.x_next = problem.Y.project(mean);
  return out;
}

}  // namespace detail

/// One single-sample iteration: draw w_k from the marginal weights and take a
/// Polyak step against that constraint. Returns x unchanged when the drawn
/// constraint is satisfied.
inline Vec ssp_iterate(const FeasibilityProblem& problem, const Vec& x, double beta, Rng& rng) {
  int idx = problem.plan.draw_single(rng);
  return problem.oracles[idx].polyak_step(x, beta, problem.Y);
}

/// One minibatch iteration: draw J_k, evaluate every batch constraint,
/// resolve the stepsize (adaptively when asked), average the displaced points
/// and project onto Y. Returns the new iterate and the transition record.
inline std::pair<Vec, IterationRecord> mssp_iterate(const FeasibilityProblem& problem,
                                                    const Vec& x, const StepsizeRule& rule,
                                                    Rng& rng, long k = 0, int workers = 1) {
  Minibatch batch = problem.plan.draw(rng);
  detail::StepOutcome step = detail::minibatch_step(problem, x, batch, rule, workers);
  IterationRecord rec;
  rec.k = k;
  rec.beta_k = step.beta;
  rec.lnk = step.lnk;
  rec.batch = std::move(batch);
  rec.max_residual = step.batch_max_residual;
  return {std::move(step.x_next), std::move(rec)};
}

namespace detail {

inline double exact_mean_violation(const FeasibilityProblem& problem, const Vec& x) {
  double acc = 0.0;
  for (int w = 0; w < problem.constraint_count(); ++w) {
    acc += problem.plan.weights()[w] * std::max(0.0, problem.oracles[w].value_at(x));
  }
  return acc;
}

}  // namespace detail

/// Run SSP or M-SSP until the full-sweep residual drops to stop_tol or the
/// iteration budget runs out. The sweep over all p constraints happens every
/// record_every iterations, together with trace recording; the averaged
/// iterate is maintained across every iteration regardless of cadence.
inline ConvergenceTrace run(const FeasibilityProblem& problem, const SolverConfig& config) {
  config.validate();
  problem.validate();
  if (config.algorithm == Algorithm::ssp && config.rule.kind != StepsizeRule::Kind::fixed) {
    throw ConfigError("run: the single-sample algorithm uses the fixed stepsize rule");
  }
  if (config.start) {
    check_same_dim(config.start->size(), std::size_t(problem.dim()), "config start");
    check_finite(*config.start, "config start");
  }

  Rng rng(config.seed);
  Vec x;
  if (config.start) {
    x = problem.Y.project(*config.start);
  } else if (config.randomize_start) {
    Vec s(problem.dim());
    for (double& v : s) v = rng.next_gaussian();
    x = problem.Y.project(s);
  } else {
    x = problem.Y.project(Vec(problem.dim(), 0.0));
  }

  ConvergenceTrace trace;
  Vec iterate_sum(problem.dim(), 0.0);
  long iterates_summed = 0;

  auto averaged_at = [&]() {
    if (iterates_summed == 0) return x;
    Vec avg(iterate_sum);
    for (double& v : avg) v /= static_cast<double>(iterates_summed);
    return avg;
  };
  auto state_fields = [&](IterationRecord& rec) {
    if (problem.witness) rec.witness_dist_sq = dist_sq(x, *problem.witness);
    if (config.record_g_exact) rec.g_exact = detail::exact_mean_violation(problem, averaged_at());
    if (config.ref_distance) {
      double d = config.ref_distance(x);
      rec.ref_dist_sq = d * d;
    }
  };

  long k = 0;
  for (; k < config.max_iters; ++k) {
    const bool cadence = (k % config.record_every) == 0;
    if (cadence) {
      double sweep = problem.sweep_max_residual(x);
      if (sweep <= config.stop_tol) {
        IterationRecord rec;
        rec.k = k;
        rec.max_residual = sweep;
        state_fields(rec);
        trace.records.push_back(std::move(rec));
        trace.stop_reason = StopReason::tol_reached;
        trace.iterations_run = k;
        trace.averaged_iterate = averaged_at();
        trace.final_iterate = std::move(x);
        return trace;
      }
    }

    IterationRecord rec;
    Vec x_next;
    if (config.algorithm == Algorithm::mssp) {
      auto [next, r] = mssp_iterate(problem, x, config.rule, rng, k, config.workers);
      x_next = std::move(next);
      rec = std::move(r);
    } else {
      Minibatch batch{problem.plan.draw_single(rng)};
      detail::StepOutcome step =
          detail::minibatch_step(problem, x, batch, config.rule, config.workers);
      rec.k = k;
      rec.beta_k = step.beta;
      rec.lnk = step.lnk;
      rec.batch = std::move(batch);
      rec.max_residual = step.batch_max_residual;
      x_next = std::move(step.x_next);
    }

    if (cadence) {
      state_fields(rec);
      trace.records.push_back(std::move(rec));
    }

    for (std::size_t i = 0; i < iterate_sum.size(); ++i) iterate_sum[i] += x[i];
    ++iterates_summed;
    x = std::move(x_next);
  }

  double sweep = problem.sweep_max_residual(x);
  IterationRecord rec;
  rec.k = k;
  rec.max_residual = sweep;
  state_fields(rec);
  trace.records.push_back(std::move(rec));
  trace.stop_reason = sweep <= config.stop_tol ? StopReason::tol_reached : StopReason::max_iters;
  trace.iterations_run = k;
  trace.averaged_iterate = averaged_at();
  trace.final_iterate = std::move(x);
  return trace;
}

/// Which squared-distance series a rate fit reads. The witness distance is
/// always recordable but only upper-bounds the distance to the feasible set;
/// it flattens at a positive constant whenever the iterate limit is not the
/// witness itself. The reference distance (when recorded) is the exact
/// distance and decays to zero, which is the quantity the linear-rate
/// statements are about.
enum class RateSource { witness_distance, reference_distance };

/// Fit a geometric decay factor: least-squares slope of the log of the chosen
/// squared-distance series against k over the tail half of the trace,
/// reported as q_hat = exp(slope) together with the fit's r^2. Zero-valued
/// records are skipped (log-undefined); at least ten positive tail records
/// are required.
inline RateReport fit_rate(const ConvergenceTrace& trace,
                           RateSource source = RateSource::witness_distance) {
  std::vector<double> ks, logs;
  const std::size_t tail_start = trace.records.size() / 2;
  for (std::size_t i = tail_start; i < trace.records.size(); ++i) {
    const IterationRecord& rec = trace.records[i];
    const std::optional<double>& value =
        source == RateSource::witness_distance ? rec.witness_dist_sq : rec.ref_dist_sq;
    if (!value) continue;
    if (!(*value > 0.0)) continue;
    ks.push_back(static_cast<double>(rec.k));
    logs.push_back(std::log(*value));
  }
  if (ks.size() < 10) {
    throw ConfigError("fit_rate: need >= 10 positive distance records in the trace tail");
  }

  const double n = static_cast<double>(ks.size());
  double mean_k = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mean_k += ks[i];
    mean_y += logs[i];
  }
  mean_k /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    double dk = ks[i] - mean_k;
    double dy = logs[i] - mean_y;
    sxx += dk * dk;
    sxy += dk * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ConfigError("fit_rate: records collapse onto a single iteration index");

  const double slope = sxy / sxx;
  RateReport report;
  report.q_hat = std::exp(slope);
  if (syy <= 1e-300) {
    report.r_squared = 1.0;  // constant data: perfectly explained
  } else {
    double ss_res = syy - slope * sxy;
    report.r_squared = 1.0 - ss_res / syy;
  }
  return report;
}

}  // namespace ssp
