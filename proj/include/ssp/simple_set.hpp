#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "ssp/linalg.hpp"

namespace ssp {

/// A closed convex set with an exact closed-form projection. Boundary points
/// count as members; membership queries take an explicit tolerance because
/// floating-point projections land on boundaries.
class SimpleSet {
 public:
  struct WholeSpace {
    int dim;
  };
  struct Box {
    Vec lower;
    Vec upper;
  };
  struct Ball {
    Vec center;
    double radius;
  };
  /// { x : <normal, x> <= offset }
  struct Halfspace {
    Vec normal;
    double offset;
  };

  static SimpleSet whole_space(int dim) {
    if (dim < 1) throw ConfigError("SimpleSet: dimension must be >= 1");
    return SimpleSet(WholeSpace{dim});
  }

  static SimpleSet box(Vec lower, Vec upper) {
    check_same_dim(lower.size(), upper.size(), "SimpleSet::box");
    check_finite(lower, "SimpleSet::box lower");
    check_finite(upper, "SimpleSet::box upper");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (lower[i] > upper[i]) throw ConfigError("SimpleSet::box: lower > upper");
    }
    return SimpleSet(Box{std::move(lower), std::move(upper)});
  }

  static SimpleSet ball(Vec center, double radius) {
    check_finite(center, "SimpleSet::ball center");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw ConfigError("SimpleSet::ball: radius must be positive");
    }
    return SimpleSet(Ball{std::move(center), radius});
  }

  static SimpleSet halfspace(Vec normal, double offset) {
    check_finite(normal, "SimpleSet::halfspace normal");
    if (!std::isfinite(offset)) throw ConfigError("SimpleSet::halfspace: offset must be finite");
    if (norm_sq(normal) == 0.0) throw ConfigError("SimpleSet::halfspace: normal must be nonzero");
    return SimpleSet(Halfspace{std::move(normal), offset});
  }

  int dim() const {
    if (auto* w = std::get_if<WholeSpace>(&v_)) return w->dim;
    if (auto* b = std::get_if<Box>(&v_)) return static_cast<int>(b->lower.size());
    if (auto* b = std::get_if<Ball>(&v_)) return static_cast<int>(b->center.size());
    return static_cast<int>(std::get<Halfspace>(v_).normal.size());
  }

  /// Nearest point of the set. Returns x itself (bitwise) when x is a member.
  Vec project(const Vec& x) const {
    check_same_dim(x.size(), std::size_t(dim()), "SimpleSet::project");
    if (std::holds_alternative<WholeSpace>(v_)) return x;
    if (auto* b = std::get_if<Box>(&v_)) {
      Vec y = x;
      for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = std::min(std::max(y[i], b->lower[i]), b->upper[i]);
      }
      return y;
    }
    if (auto* b = std::get_if<Ball>(&v_)) {
      Vec d = sub(x, b->center);
      double dn = norm(d);
      if (dn <= b->radius) return x;
      Vec y(x.size());
      double scale = b->radius / dn;
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = b->center[i] + scale * d[i];
      return y;
    }
    const auto& h = std::get<Halfspace>(v_);
    double viol = dot(h.normal, x) - h.offset;
    if (viol <= 0.0) return x;
    double coef = viol / norm_sq(h.normal);
    Vec y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - coef * h.normal[i];
    return y;
  }

  /// True iff dist(x, set) <= tol, computed in closed form per variant.
  bool contains(const Vec& x, double tol = 1e-9) const {
    check_same_dim(x.size(), std::size_t(dim()), "SimpleSet::contains");
    if (tol < 0) throw ConfigError("SimpleSet::contains: tol must be >= 0");
    return distance(x) <= tol;
  }

  /// Euclidean distance from x to the set.
  double distance(const Vec& x) const {
    check_same_dim(x.size(), std::size_t(dim()), "SimpleSet::distance");
    if (std::holds_alternative<WholeSpace>(v_)) return 0.0;
    if (auto* b = std::get_if<Box>(&v_)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double e = std::max({b->lower[i] - x[i], x[i] - b->upper[i], 0.0});
        acc += e * e;
      }
      return std::sqrt(acc);
    }
    if (auto* b = std::get_if<Ball>(&v_)) {
      return std::max(0.0, norm(sub(x, b->center)) - b->radius);
    }
    const auto& h = std::get<Halfspace>(v_);
    return std::max(0.0, (dot(h.normal, x) - h.offset) / norm(h.normal));
  }

  bool is_whole_space() const { return std::holds_alternative<WholeSpace>(v_); }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }

  std::string kind() const {
    if (std::holds_alternative<WholeSpace>(v_)) return "whole_space";
    if (std::holds_alternative<Box>(v_)) return "box";
    if (std::holds_alternative<Ball>(v_)) return "ball";
    return "halfspace";
  }

 private:
  using Variant = std::variant<WholeSpace, Box, Ball, Halfspace>;
  explicit SimpleSet(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

}  // namespace ssp
