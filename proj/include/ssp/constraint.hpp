#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "ssp/linalg.hpp"
#include "ssp/simple_set.hpp"

namespace ssp {

/// Outcome of a single constraint evaluation. When the constraint is
/// satisfied the subgradient slot holds the fixed fallback direction e1 and
/// positive_part is zero, so the Polyak update vanishes identically.
struct EvalResult {
  double value = 0.0;          // raw g(x)
  double positive_part = 0.0;  // max(0, g(x)), zeroed when within tolerance
  Vec subgradient;             // d in the update; fallback e1 when satisfied
  bool violated = false;
};

/// One functional constraint g(x) <= 0 given by a convex g with a cheap
/// subgradient. Three shapes are supported:
///   affine        g(x) = <a, x> + b
///   ball_distance g(x) = ||x - c|| - r
///   max_affine    g(x) = max_i (<a_i, x> + b_i)
/// Each oracle stores a bound on subgradient norms valid everywhere; the
/// constructors derive it in closed form and reject smaller user overrides.
class ConstraintOracle {
 public:
  struct Affine {
    Vec a;
    double b;
  };
  struct BallDistance {
    Vec center;
    double radius;
  };
  struct MaxAffine {
    Mat rows;
    Vec offsets;
  };

  static ConstraintOracle affine(Vec a, double b, double subgradient_bound = 0.0) {
    check_finite(a, "ConstraintOracle::affine a");
    if (!std::isfinite(b)) throw ConfigError("ConstraintOracle::affine: b must be finite");
    double an = norm(a);
    if (an == 0.0) throw ConfigError("ConstraintOracle::affine: a must be nonzero");
    return ConstraintOracle(Affine{std::move(a), b}, resolve_bound(subgradient_bound, an));
  }

  static ConstraintOracle ball_distance(Vec center, double radius,
                                        double subgradient_bound = 0.0) {
    check_finite(center, "ConstraintOracle::ball_distance center");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw ConfigError("ConstraintOracle::ball_distance: radius must be positive");
    }
    return ConstraintOracle(BallDistance{std::move(center), radius},
                            resolve_bound(subgradient_bound, 1.0));
  }

  static ConstraintOracle max_affine(Mat rows, Vec offsets, double subgradient_bound = 0.0) {
    if (rows.rows() < 1) throw ConfigError("ConstraintOracle::max_affine: needs >= 1 piece");
    check_same_dim(std::size_t(rows.rows()), offsets.size(), "ConstraintOracle::max_affine");
    check_finite(offsets, "ConstraintOracle::max_affine offsets");
    double max_norm = 0.0;
    for (int i = 0; i < rows.rows(); ++i) {
      double rn = norm(rows.row_vec(i));
      if (rn == 0.0) throw ConfigError("ConstraintOracle::max_affine: zero row");
      max_norm = std::max(max_norm, rn);
    }
    return ConstraintOracle(MaxAffine{std::move(rows), std::move(offsets)},
                            resolve_bound(subgradient_bound, max_norm));
  }

  int dim() const {
    if (auto* a = std::get_if<Affine>(&v_)) return static_cast<int>(a->a.size());
    if (auto* b = std::get_if<BallDistance>(&v_)) return static_cast<int>(b->center.size());
    return std::get<MaxAffine>(v_).rows.cols();
  }

  /// Valid bound on ||d|| for every subgradient d over the whole space.
  double subgradient_bound() const { return subgradient_bound_; }

  /// Raw g(x) without subgradient work; used by feasibility sweeps.
  double value_at(const Vec& x) const {
    check_same_dim(x.size(), std::size_t(dim()), "ConstraintOracle::value_at");
    if (auto* a = std::get_if<Affine>(&v_)) return dot(a->a, x) + a->b;
    if (auto* b = std::get_if<BallDistance>(&v_)) return norm(sub(x, b->center)) - b->radius;
    const auto& m = std::get<MaxAffine>(v_);
    Vec vals = matvec(m.rows, x);
    double g = vals[0] + m.offsets[0];
    for (int i = 1; i < m.rows.rows(); ++i) g = std::max(g, vals[i] + m.offsets[i]);
    return g;
  }

  /// Evaluate g, its positive part and a subgradient of g+ at x. The
  /// constraint counts as violated iff g(x) > violation_tol; below that the
  /// positive part is reported as zero so downstream updates vanish.
  EvalResult evaluate(const Vec& x, double violation_tol = 0.0) const {
    check_same_dim(x.size(), std::size_t(dim()), "ConstraintOracle::evaluate");
    if (violation_tol < 0) throw ConfigError("evaluate: violation_tol must be >= 0");

    EvalResult out;
    if (auto* a = std::get_if<Affine>(&v_)) {
      out.value = dot(a->a, x) + a->b;
      out.violated = out.value > violation_tol;
      if (out.violated) {
        out.positive_part = out.value;
        out.subgradient = a->a;
      }
    } else if (auto* b = std::get_if<BallDistance>(&v_)) {
      Vec d = sub(x, b->center);
      double dn = norm(d);
      out.value = dn - b->radius;
      out.violated = out.value > violation_tol;
      if (out.violated) {
        out.positive_part = out.value;
        // g > 0 implies ||x - c|| > r > 0, so the gradient is well defined
        for (double& di : d) di /= dn;
        out.subgradient = std::move(d);
      }
    } else {
      const auto& m = std::get<MaxAffine>(v_);
      Vec vals = matvec(m.rows, x);
      int best = 0;
      double g = vals[0] + m.offsets[0];
      for (int i = 1; i < m.rows.rows(); ++i) {
        double gi = vals[i] + m.offsets[i];
        if (gi > g) {  // strict: ties break to the smallest index
          g = gi;
          best = i;
        }
      }
      out.value = g;
      out.violated = out.value > violation_tol;
      if (out.violated) {
        out.positive_part = out.value;
        out.subgradient = m.rows.row_vec(best);
      }
    }
    if (!out.violated) {
      out.positive_part = 0.0;
      out.subgradient = Vec(dim(), 0.0);
      out.subgradient[0] = 1.0;  // any d != 0 works; e1 keeps streams aligned
    }
    return out;
  }

  /// One Polyak step against this constraint: project x - beta g+/||d||^2 d
  /// onto Y. Returns x unchanged when the constraint is satisfied.
  Vec polyak_step(const Vec& x, double beta, const SimpleSet& Y) const {
    if (!(beta > 0.0)) throw ConfigError("polyak_step: beta must be > 0");
    EvalResult ev = evaluate(x, 0.0);
    if (!ev.violated) return x;
    return Y.project(displaced(x, ev, beta));
  }

  /// x - beta g+/||d||^2 d for an evaluation at x (no projection).
  static Vec displaced(const Vec& x, const EvalResult& ev, double beta) {
    double coef = beta * ev.positive_part / norm_sq(ev.subgradient);
    Vec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - coef * ev.subgradient[i];
    return z;
  }

  std::string kind() const {
    if (std::holds_alternative<Affine>(v_)) return "affine";
    if (std::holds_alternative<BallDistance>(v_)) return "ball";
    return "max_affine";
  }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

 private:
  using Variant = std::variant<Affine, BallDistance, MaxAffine>;

  ConstraintOracle(Variant v, double bound) : v_(std::move(v)), subgradient_bound_(bound) {}

  static double resolve_bound(double user_bound, double closed_form) {
    if (user_bound == 0.0) return closed_form;
    if (!(user_bound > 0.0) || !std::isfinite(user_bound)) {
      throw ConfigError("ConstraintOracle: subgradient bound must be positive");
    }
    if (user_bound < closed_form * (1.0 - 1e-12)) {
      throw ConfigError("ConstraintOracle: supplied subgradient bound is below the exact value");
    }
    return user_bound;
  }

  Variant v_;
  double subgradient_bound_;
};

}  // namespace ssp
