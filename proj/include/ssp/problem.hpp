#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssp/constraint.hpp"
#include "ssp/linalg.hpp"
#include "ssp/sampling.hpp"
#include "ssp/simple_set.hpp"

namespace ssp {

/// A convex feasibility instance: find x in Y with g_w(x) <= 0 for every
/// index w. Holds the finite constraint family, the simple set Y, the
/// sampling plan, and optionally a known feasible point used purely for
/// diagnostics (distance traces, rate fits).
struct FeasibilityProblem {
  std::vector<ConstraintOracle> oracles;
  SimpleSet Y;
  SamplingPlan plan;
  std::optional<Vec> witness;

  static FeasibilityProblem checked(std::vector<ConstraintOracle> oracles, SimpleSet Y,
                                    SamplingPlan plan, std::optional<Vec> witness,
                                    double witness_tol = 1e-9) {
    FeasibilityProblem p{std::move(oracles), std::move(Y), std::move(plan),
                         std::move(witness)};
    p.validate(witness_tol);
    return p;
  }

  int dim() const { return Y.dim(); }
  int constraint_count() const { return static_cast<int>(oracles.size()); }

  /// Uniform bound on subgradient norms across the whole family.
  double subgradient_bound() const {
    double m = 0.0;
    for (const ConstraintOracle& c : oracles) m = std::max(m, c.subgradient_bound());
    return m;
  }

  /// max_w g_w^+(x): the exact feasibility check over the finite family.
  double sweep_max_residual(const Vec& x) const {
    double worst = 0.0;
    for (const ConstraintOracle& c : oracles) {
      worst = std::max(worst, std::max(0.0, c.value_at(x)));
    }
    return worst;
  }

  /// The matrix of affine normals, when every constraint is affine.
  std::optional<Mat> affine_matrix() const {
    std::vector<Vec> rows;
    rows.reserve(oracles.size());
    for (const ConstraintOracle& c : oracles) {
      const auto* a = c.get_if<ConstraintOracle::Affine>();
      if (a == nullptr) return std::nullopt;
      rows.push_back(a->a);
    }
    return Mat::from_rows(rows);
  }

  void validate(double witness_tol = 1e-9) const {
    if (oracles.empty()) throw ConfigError("problem: needs >= 1 constraint");
    for (const ConstraintOracle& c : oracles) {
      if (c.dim() != dim()) {
        throw ConfigError("problem: constraint dimension differs from Y");
      }
    }
    if (plan.omega_count() != constraint_count()) {
      throw ConfigError("problem: sampling weights length differs from constraint count");
    }
    if (witness) {
      check_same_dim(witness->size(), std::size_t(dim()), "problem witness");
      check_finite(*witness, "problem witness");
      if (!Y.contains(*witness, witness_tol)) {
        throw ConfigError("problem: witness lies outside Y");
      }
      for (int w = 0; w < constraint_count(); ++w) {
        if (oracles[w].value_at(*witness) > witness_tol) {
          throw ConfigError("problem: witness violates constraint " + std::to_string(w));
        }
      }
    }
  }
};

}  // namespace ssp
