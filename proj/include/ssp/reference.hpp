#pragma once

#include <cmath>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "ssp/problem.hpp"

namespace ssp {

struct ReferenceConfig {
  // Degenerate polyhedral faces plateau for hundreds of thousands of cycles
  // (correction mass creeping between near-parallel halfspaces) before the
  // finite-termination collapse, so the cycle budget is generous.
  int dykstra_iters = 2000000;
  double dykstra_tol = 1e-10;  // per-cycle change in iterate + corrections
  int c_sample_points = 1000;
  std::uint64_t c_seed = 0;
  int workers = 1;

  void validate() const {
    if (dykstra_iters < 1 || c_sample_points < 1 || workers < 1 || !(dykstra_tol > 0)) {
      throw ConfigError("ReferenceConfig: counts must be positive and tol > 0");
    }
  }
};

/// Projection onto an intersection of simple pieces by Dykstra's cyclic
/// correction scheme. Unlike plain cyclic projection this converges to the
/// true nearest point, which is what the distance diagnostics need.
///
/// Stops when a full cycle moves neither the iterate nor any correction
/// vector by more than dykstra_tol. The correction-change term matters: on an
/// empty intersection the iterate alone re-traces a cycle exactly while the
/// corrections drift, so watching only the iterate would report convergence
/// to a point that projects onto nothing.
inline Vec dykstra_project(const std::vector<SimpleSet>& pieces, const Vec& x,
                           const ReferenceConfig& cfg = {}) {
  cfg.validate();
  if (pieces.empty()) throw ConfigError("dykstra_project: needs >= 1 piece");
  for (const SimpleSet& s : pieces) {
    check_same_dim(std::size_t(s.dim()), x.size(), "dykstra_project");
  }
  check_finite(x, "dykstra_project x");

  const std::size_t n = x.size();
  Vec current = x;
  std::vector<Vec> corrections(pieces.size(), Vec(n, 0.0));

  double change = 0.0;
  for (int cycle = 0; cycle < cfg.dykstra_iters; ++cycle) {
    double correction_change_sq = 0.0;
    Vec cycle_start = current;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      Vec shifted(n);
      for (std::size_t j = 0; j < n; ++j) shifted[j] = current[j] + corrections[i][j];
      Vec projected = pieces[i].project(shifted);
      for (std::size_t j = 0; j < n; ++j) {
        double updated = shifted[j] - projected[j];
        double delta = updated - corrections[i][j];
        correction_change_sq += delta * delta;
        corrections[i][j] = updated;
      }
      current = std::move(projected);
    }
    change = std::sqrt(correction_change_sq + dist_sq(current, cycle_start));
    if (change <= cfg.dykstra_tol) return current;
  }

  double worst_membership = 0.0;
  for (const SimpleSet& s : pieces) worst_membership = std::max(worst_membership, s.distance(current));
  throw ConvergenceError("dykstra_project: no convergence in " +
                             std::to_string(cfg.dykstra_iters) + " cycles (last change " +
                             std::to_string(change) + ", worst membership distance " +
                             std::to_string(worst_membership) + ")",
                         change);
}

/// Exact infeasibility measure: the weights-weighted mean of g_w^+(x) over
/// the finite constraint family.
inline double exact_G(const FeasibilityProblem& problem, const Vec& x) {
  double acc = 0.0;
  for (int w = 0; w < problem.constraint_count(); ++w) {
    acc += problem.plan.weights()[w] * std::max(0.0, problem.oracles[w].value_at(x));
  }
  return acc;
}

namespace detail {

/// The feasible set of an all-affine problem as simple pieces: one halfspace
/// per constraint (a^T x + b <= 0 becomes <a, x> <= -b) plus Y when it is
/// not the whole space.
inline std::vector<SimpleSet> affine_pieces(const FeasibilityProblem& problem) {
  std::vector<SimpleSet> pieces;
  pieces.reserve(problem.oracles.size() + 1);
  for (const ConstraintOracle& c : problem.oracles) {
    const auto* a = c.get_if<ConstraintOracle::Affine>();
    if (a == nullptr) {
      throw ConfigError("reference oracle: distance to the feasible set needs an "
                        "all-affine problem");
    }
    pieces.push_back(SimpleSet::halfspace(a->a, -a->b));
  }
  if (!problem.Y.is_whole_space()) pieces.push_back(problem.Y);
  return pieces;
}

}  // namespace detail

/// Distance from x to the feasible set of an all-affine problem, computed by
/// Dykstra projection onto the halfspace pieces.
inline double dist_to_feasible_set(const FeasibilityProblem& problem, const Vec& x,
                                   const ReferenceConfig& cfg = {}) {
  return norm(sub(x, dykstra_project(detail::affine_pieces(problem), x, cfg)));
}

/// A reusable distance-to-feasible-set callback for trace diagnostics
/// (all-affine problems only). The pieces are captured once up front.
inline std::function<double(const Vec&)> make_ref_distance(const FeasibilityProblem& problem,
                                                           const ReferenceConfig& cfg = {}) {
  cfg.validate();
  std::vector<SimpleSet> pieces = detail::affine_pieces(problem);
  return [pieces = std::move(pieces), cfg](const Vec& x) {
    return norm(sub(x, dykstra_project(pieces, x, cfg)));
  };
}

/// Empirical lower bound on the linear-regularity constant: the largest
/// dist^2(y, X*) / G(y)^2 over seeded probe points y in Y, skipping feasible
/// probes (0/0). Probes are Gaussian clouds of increasing spread around the
/// witness (or the origin), projected onto Y; a max over a growing nested
/// sample is monotone in c_sample_points. The estimate treats the stationary
/// marginal sampling law, not per-slot conditional distributions.
inline double estimate_c(const FeasibilityProblem& problem, const ReferenceConfig& cfg = {}) {
  cfg.validate();
  problem.validate();
  std::vector<SimpleSet> pieces = detail::affine_pieces(problem);

  Vec anchor = problem.witness ? *problem.witness : Vec(problem.dim(), 0.0);
  static constexpr double kSpreads[] = {0.5, 1.0, 2.0, 5.0, 10.0};

  Rng rng(cfg.c_seed);
  std::vector<Vec> probes;
  probes.reserve(cfg.c_sample_points);
  for (int s = 0; s < cfg.c_sample_points; ++s) {
    double spread = kSpreads[s % std::size(kSpreads)];
    Vec y(problem.dim());
    for (double& v : y) v = rng.next_gaussian();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = anchor[i] + spread * y[i];
    probes.push_back(problem.Y.project(y));
  }

  const int count = static_cast<int>(probes.size());
  std::vector<double> ratios(count, 0.0);
  std::vector<char> infeasible(count, 0);
  auto probe_range = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      double g = exact_G(problem, probes[i]);
      if (g == 0.0) continue;  // feasible probe: 0/0 skipped
      infeasible[i] = 1;
      double d = norm(sub(probes[i], dykstra_project(pieces, probes[i], cfg)));
      ratios[i] = (d * d) / (g * g);
    }
  };
  if (cfg.workers <= 1) {
    probe_range(0, count);
  } else {
    const int used = std::min(cfg.workers, count);
    const int chunk = (count + used - 1) / used;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(used);
    auto guarded = [&](int slot, int lo, int hi) {
      try {
        probe_range(lo, hi);
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    };
    for (int t = 1; t < used; ++t) {
      int lo = t * chunk;
      int hi = std::min(count, lo + chunk);
      if (lo < hi) threads.emplace_back(guarded, t, lo, hi);
    }
    guarded(0, 0, std::min(chunk, count));
    for (std::thread& th : threads) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  double c_hat = 0.0;
  bool any = false;
  for (int i = 0; i < count; ++i) {
    if (!infeasible[i]) continue;
    any = true;
    c_hat = std::max(c_hat, ratios[i]);
  }
  if (!any) {
    throw ConfigError("estimate_c: every probe was feasible; enlarge the sampling region");
  }
  return c_hat;
}

}  // namespace ssp
