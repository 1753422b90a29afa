#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "ssp/constraint.hpp"
#include "ssp/linalg.hpp"
#include "ssp/sampling.hpp"

namespace ssp {

/// Where an extrapolation parameter came from. The spectral bounds are valid
/// upper bounds, which is what the extrapolated stepsize formulas require.
enum class ParamSource { exact_partition, spectral_bound, user_supplied };

inline std::string to_string(ParamSource s) {
  switch (s) {
    case ParamSource::exact_partition: return "exact-partition";
    case ParamSource::spectral_bound: return "spectral-bound";
    case ParamSource::user_supplied: return "user-supplied";
  }
  return "?";
}

/// Alignment parameters in (0, 1] driving the extrapolated stepsizes.
/// `alignment` bounds the mean-direction ratio over the whole constraint
/// distribution; `batch_alignment` bounds the worst batch. Either may be
/// absent when not computable for the problem at hand.
struct ExtrapolationParams {
  std::optional<double> alignment;        // L
  std::optional<double> batch_alignment;  // L_N
  ParamSource source = ParamSource::user_supplied;
};

namespace detail {

inline void require_unit_rows(const Mat& a) {
  for (int i = 0; i < a.rows(); ++i) {
    double n2 = 0.0;
    for (double v : a.row(i)) n2 += v * v;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-10) {
      throw ConfigError("alignment bound: constraint rows must be unit-norm; "
                        "normalize the problem first");
    }
  }
}

}  // namespace detail

/// Upper bound on the full-distribution alignment for a system of linear
/// constraints with unit-norm rows and uniform sampling weights:
/// lambda_max(A A^T) / p. Strictly below 1 whenever rank(A) >= 2. Alignment
/// never exceeds 1, so rounding noise in the eigenvalue is clamped away.
inline double linear_alignment_bound(const Mat& a, const Vec& weights) {
  if (a.rows() < 1) throw ConfigError("linear_alignment_bound: empty matrix");
  check_same_dim(std::size_t(a.rows()), weights.size(), "linear_alignment_bound");
  detail::require_unit_rows(a);
  const double uniform = 1.0 / a.rows();
  for (double w : weights) {
    if (std::abs(w - uniform) > 1e-12) {
      throw ConfigError("linear_alignment_bound: proved for uniform weights only");
    }
  }
  return std::min(1.0, lambda_max(gram(a)) / a.rows());
}

/// Upper bound on the batch alignment: the worst lambda_max(A_J A_J^T) / N
/// over an enumerated batch support (every row of A unit-norm), clamped at 1.
inline double batch_alignment_bound(const Mat& a, const std::vector<Minibatch>& support) {
  if (support.empty()) throw ConfigError("batch_alignment_bound: empty support");
  detail::require_unit_rows(a);
  double worst = 0.0;
  for (const Minibatch& batch : support) {
    std::vector<Vec> rows;
    rows.reserve(batch.size());
    for (int idx : batch) {
      if (idx < 0 || idx >= a.rows()) {
        throw ConfigError("batch_alignment_bound: batch index out of range");
      }
      rows.push_back(a.row_vec(idx));
    }
    Mat sub = Mat::from_rows(rows);
    worst = std::max(worst, lambda_max(gram(sub)) / static_cast<double>(batch.size()));
  }
  return std::min(1.0, worst);
}

inline double batch_alignment_bound(const Mat& a, const SamplingPlan& plan) {
  return batch_alignment_bound(a, plan.block_enumeration());
}

/// Online alignment of one evaluated batch:
///   ||mean_i g+_i/||d_i||^2 d_i||^2  /  mean_i (g+_i)^2/||d_i||^2,
/// with the 0/0 = 0 convention when no constraint in the batch is violated.
/// Always in [0, 1]; equals 1 when exactly one constraint is violated.
inline double batch_alignment(std::span<const EvalResult> evals) {
  if (evals.empty()) throw ConfigError("batch_alignment: empty batch");
  const std::size_t dim = evals.front().subgradient.size();
  const double n = static_cast<double>(evals.size());

  Vec mean_step(dim, 0.0);
  double mean_ratio = 0.0;
  for (const EvalResult& ev : evals) {
    check_same_dim(ev.subgradient.size(), dim, "batch_alignment");
    if (ev.positive_part == 0.0) continue;
    double dd = norm_sq(ev.subgradient);
    double coef = ev.positive_part / dd;
    for (std::size_t i = 0; i < dim; ++i) mean_step[i] += coef * ev.subgradient[i];
    mean_ratio += ev.positive_part * ev.positive_part / dd;
  }
  if (mean_ratio == 0.0) return 0.0;
  for (double& v : mean_step) v /= n;
  mean_ratio /= n;
  return norm_sq(mean_step) / mean_ratio;
}

/// Stepsize selection strategy for the solvers. `fixed` is the classical
/// beta in (0, 2); the other three extrapolate using alignment parameters
/// and may exceed 2 whenever alignment < 1.
struct StepsizeRule {
  enum class Kind { fixed, extrapolated, batch_extrapolated, adaptive };

  Kind kind = Kind::fixed;
  double beta = 1.0;           // fixed only
  double delta = 1.0;          // extrapolated variants
  double fallback_beta = 1.0;  // adaptive, used when the batch has no violation
  ExtrapolationParams params;

  static StepsizeRule fixed(double beta) {
    require_open_0_2(beta, "beta");
    StepsizeRule r;
    r.kind = Kind::fixed;
    r.beta = beta;
    return r;
  }

  static StepsizeRule extrapolated(double delta, ExtrapolationParams params) {
    require_open_0_2(delta, "delta");
    if (!params.alignment) {
      throw ConfigError("StepsizeRule::extrapolated: alignment parameter required");
    }
    require_alignment(*params.alignment, true);
    StepsizeRule r;
    r.kind = Kind::extrapolated;
    r.delta = delta;
    r.params = params;
    return r;
  }

  static StepsizeRule batch_extrapolated(double delta, ExtrapolationParams params) {
    require_open_0_2(delta, "delta");
    if (!params.batch_alignment) {
      throw ConfigError("StepsizeRule::batch_extrapolated: batch alignment parameter required");
    }
    require_alignment(*params.batch_alignment, false);
    StepsizeRule r;
    r.kind = Kind::batch_extrapolated;
    r.delta = delta;
    r.params = params;
    return r;
  }

  static StepsizeRule adaptive(double delta, double fallback_beta = 1.0) {
    require_open_0_2(delta, "delta");
    require_open_0_2(fallback_beta, "fallback_beta");
    StepsizeRule r;
    r.kind = Kind::adaptive;
    r.delta = delta;
    r.fallback_beta = fallback_beta;
    return r;
  }

  std::string kind_name() const {
    switch (kind) {
      case Kind::fixed: return "fixed";
      case Kind::extrapolated: return "extrapolated-l";
      case Kind::batch_extrapolated: return "extrapolated-ln";
      case Kind::adaptive: return "adaptive";
    }
    return "?";
  }

 private:
  static void require_open_0_2(double v, const char* what) {
    if (!(v > 0.0) || !(v < 2.0)) {
      throw ConfigError(std::string("StepsizeRule: ") + what + " must lie in (0, 2)");
    }
  }
  static void require_alignment(double v, bool zero_ok) {
    if (!std::isfinite(v) || v > 1.0 || v < 0.0 || (!zero_ok && v == 0.0)) {
      throw ConfigError("StepsizeRule: alignment parameters must lie in (0, 1]");
    }
  }
};

/// The stepsize for one iteration. The adaptive rule needs the online batch
/// alignment of the current iterate; the others ignore it.
inline double resolve_beta(const StepsizeRule& rule, int batch_size,
                           std::optional<double> online_alignment = std::nullopt) {
  if (batch_size < 1) throw ConfigError("resolve_beta: batch_size must be >= 1");
  double beta = 0.0;
  switch (rule.kind) {
    case StepsizeRule::Kind::fixed:
      beta = rule.beta;
      break;
    case StepsizeRule::Kind::extrapolated: {
      double inv_n = 1.0 / batch_size;
      beta = (2.0 - rule.delta) / (inv_n + (1.0 - inv_n) * *rule.params.alignment);
      break;
    }
    case StepsizeRule::Kind::batch_extrapolated:
      beta = (2.0 - rule.delta) / *rule.params.batch_alignment;
      break;
    case StepsizeRule::Kind::adaptive: {
      if (!online_alignment) {
        throw ConfigError("resolve_beta: adaptive rule needs the online batch alignment");
      }
      if (*online_alignment == 0.0) return rule.fallback_beta;
      beta = (2.0 - rule.delta) / *online_alignment;
      break;
    }
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("resolve_beta: computed stepsize is not positive and finite; "
                      "check the alignment parameters");
  }
  return beta;
}

}  // namespace ssp
