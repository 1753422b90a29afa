#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ssp/problem.hpp"
#include "ssp/rng.hpp"

namespace ssp {

/// Spectrum of generated linear instances:
///   orthogonalized   mutually orthonormal rows (needs p <= n); every batch
///                    alignment bound collapses toward 1/N
///   generic          independent unit-normalized Gaussian rows
///   duplicated_rows  a single direction with alternating sign (a slab);
///                    every batch is rank one, alignment bound exactly 1
enum class Conditioning { orthogonalized, generic, duplicated_rows };

inline std::string to_string(Conditioning c) {
  switch (c) {
    case Conditioning::orthogonalized: return "orthogonalized";
    case Conditioning::generic: return "generic";
    case Conditioning::duplicated_rows: return "duplicated-rows";
  }
  return "?";
}

namespace detail {

inline Vec random_unit(Rng& rng, int n) {
  Vec v(n);
  double n2 = 0.0;
  do {
    for (double& x : v) x = rng.next_gaussian();
    n2 = norm_sq(v);
  } while (n2 < 1e-12);
  double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace detail

/// Seeded linear feasibility instance with a constructed witness: unit rows
/// a_w and offsets chosen so the witness satisfies every constraint with
/// slack exactly `margin`. margin = 0 puts the witness on every boundary (no
/// interior); margin > 0 reproduces the classical interior case. The default
/// plan draws single uniform samples; callers re-batch via the plan.
inline FeasibilityProblem gen_linear(int n, int p, Conditioning conditioning, double margin,
                                     std::uint64_t seed) {
  if (n < 2) throw ConfigError("gen_linear: n must be >= 2");
  if (p < 1) throw ConfigError("gen_linear: p must be >= 1");
  if (margin < 0 || !std::isfinite(margin)) throw ConfigError("gen_linear: margin must be >= 0");

  Rng rng(seed);
  std::vector<Vec> rows;
  rows.reserve(p);
  switch (conditioning) {
    case Conditioning::generic:
      for (int i = 0; i < p; ++i) rows.push_back(detail::random_unit(rng, n));
      break;
    case Conditioning::orthogonalized: {
      if (p > n) {
        throw ConfigError("gen_linear: orthogonalized needs p <= n per block");
      }
      // modified Gram-Schmidt over fresh Gaussian draws; redraw on breakdown
      while (static_cast<int>(rows.size()) < p) {
        Vec v(n);
        for (double& x : v) x = rng.next_gaussian();
        for (const Vec& q : rows) {
          double proj = dot(q, v);
          for (int j = 0; j < n; ++j) v[j] -= proj * q[j];
        }
        double vn = norm(v);
        if (vn < 1e-8) continue;
        for (double& x : v) x /= vn;
        rows.push_back(std::move(v));
      }
      break;
    }
    case Conditioning::duplicated_rows: {
      // one direction repeated p times: every batch Gram is the all-ones
      // matrix, so the alignment bound is exactly 1 and minibatching cannot
      // help regardless of the stepsize strategy
      Vec a = detail::random_unit(rng, n);
      for (int i = 0; i < p; ++i) rows.push_back(a);
      break;
    }
  }

  Vec witness(n);
  for (double& x : witness) x = rng.next_gaussian();

  std::vector<ConstraintOracle> oracles;
  oracles.reserve(p);
  for (const Vec& a : rows) {
    double b = -dot(a, witness) - margin;
    oracles.push_back(ConstraintOracle::affine(a, b));
  }

  Vec weights(p, 1.0 / p);
  return FeasibilityProblem::checked(std::move(oracles), SimpleSet::whole_space(n),
                                     SamplingPlan::iid(std::move(weights), 1),
                                     std::move(witness));
}

/// Seeded intersection of p Euclidean balls sharing a common interior point,
/// expressed through distance constraints g(x) = ||x - c|| - r. The shared
/// point is stored as the witness. Exercises non-differentiable oracles with
/// unit subgradient bound.
inline FeasibilityProblem gen_ball_intersection(int n, int p, std::uint64_t seed) {
  if (n < 1) throw ConfigError("gen_ball_intersection: n must be >= 1");
  if (p < 2) throw ConfigError("gen_ball_intersection: p must be >= 2");

  Rng rng(seed);
  Vec witness(n);
  for (double& x : witness) x = rng.next_gaussian();

  std::vector<ConstraintOracle> oracles;
  oracles.reserve(p);
  for (int i = 0; i < p; ++i) {
    Vec direction = detail::random_unit(rng, n);
    double offset = std::abs(rng.next_gaussian());
    Vec center(n);
    for (int j = 0; j < n; ++j) center[j] = witness[j] + offset * direction[j];
    double radius = offset + 0.25 + std::abs(rng.next_gaussian());
    oracles.push_back(ConstraintOracle::ball_distance(std::move(center), radius));
  }

  Vec weights(p, 1.0 / p);
  return FeasibilityProblem::checked(std::move(oracles), SimpleSet::whole_space(n),
                                     SamplingPlan::iid(std::move(weights), 1),
                                     std::move(witness));
}

}  // namespace ssp
