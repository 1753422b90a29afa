#include <doctest.h>

#include <cmath>

#include "ssp/constraint.hpp"
#include "ssp/rng.hpp"
#include "support/oracles.hpp"

using namespace ssp;

TEST_CASE("affine evaluate: violated and satisfied") {
  ConstraintOracle c = ConstraintOracle::affine({1, 0}, -1.0);

  EvalResult hit = c.evaluate({2, 0});
  CHECK(hit.value == 1.0);
  CHECK(hit.positive_part == 1.0);
  CHECK(hit.subgradient == Vec{1, 0});
  CHECK(hit.violated);

  EvalResult miss = c.evaluate({0, 0});
  CHECK(miss.value == -1.0);
  CHECK(miss.positive_part == 0.0);
  CHECK(miss.subgradient == Vec{1, 0});  // fallback e1
  CHECK_FALSE(miss.violated);
}

TEST_CASE("violation tolerance relaxes the dichotomy") {
  ConstraintOracle c = ConstraintOracle::affine({1, 0}, 0.0);
  EvalResult ev = c.evaluate({1e-7, 0}, 1e-6);
  CHECK_FALSE(ev.violated);
  CHECK(ev.positive_part == 0.0);
  CHECK(c.evaluate({1e-5, 0}, 1e-6).violated);
}

TEST_CASE("ball-distance subgradient matches finite differences") {
  ConstraintOracle c = ConstraintOracle::ball_distance({0, 0, 0}, 1.0);
  Rng rng(101);
  auto g = [&](const Vec& x) { return c.value_at(x); };
  int tested = 0;
  while (tested < 50) {
    Vec x(3);
    for (double& v : x) v = 4.0 * rng.next_gaussian();
    EvalResult ev = c.evaluate(x);
    if (!ev.violated || ev.value < 0.1) continue;  // stay away from the kink
    Vec fd = oracles::finite_diff_grad(g, x);
    for (int i = 0; i < 3; ++i) CHECK(ev.subgradient[i] == doctest::Approx(fd[i]).epsilon(1e-6));
    ++tested;
  }
}

TEST_CASE("max-affine picks the smallest maximizing index") {
  // two identical pieces: the tie must break to index 0
  Mat rows(3, 2, {0, 1, 1, 0, 1, 0});
  ConstraintOracle c = ConstraintOracle::max_affine(rows, {0, 0, 0});
  EvalResult ev = c.evaluate({5, 1});
  CHECK(ev.value == 5.0);
  CHECK(ev.subgradient == Vec{1, 0});  // row 1, not row 2
}

TEST_CASE("polyak step: closed-form halfspace cases") {
  ConstraintOracle c = ConstraintOracle::affine({1, 0}, -1.0);
  SimpleSet plane = SimpleSet::whole_space(2);

  // beta = 1 on an affine constraint is the exact projection
  CHECK(c.polyak_step({2, 0}, 1.0, plane) == Vec{1, 0});
  // satisfied constraint: the step vanishes
  CHECK(c.polyak_step({0, 0}, 1.0, plane) == Vec{0, 0});
  // beta = 0.5 removes half the residual
  CHECK(c.polyak_step({2, 0}, 0.5, plane) == Vec{1.5, 0});
}

TEST_CASE("subgradient inequality certifies convexity") {
  Rng rng(55);
  ConstraintOracle oracle_set[] = {
      ConstraintOracle::affine({0.6, -0.8}, 0.3),
      ConstraintOracle::ball_distance({1, -1}, 0.7),
      ConstraintOracle::max_affine(Mat(2, 2, {1, 0, 0, 1}), {0.1, -0.2}),
  };
  for (const ConstraintOracle& c : oracle_set) {
    for (int trial = 0; trial < 200; ++trial) {
      Vec x = {3 * rng.next_gaussian(), 3 * rng.next_gaussian()};
      Vec z = {3 * rng.next_gaussian(), 3 * rng.next_gaussian()};
      EvalResult ev = c.evaluate(x);
      if (!ev.violated) continue;
      CHECK(ev.value + dot(ev.subgradient, sub(z, x)) <= c.value_at(z) + 1e-10);
    }
  }
}

TEST_CASE("subgradient norms stay within the stored bound") {
  Rng rng(99);
  ConstraintOracle oracle_set[] = {
      ConstraintOracle::affine({3, 4}, -2.0),  // bound 5
      ConstraintOracle::ball_distance({0.5, 0.5}, 1.0),
      ConstraintOracle::max_affine(Mat(2, 2, {0.6, 0.8, 2, 0}), {0, 0}),
  };
  for (const ConstraintOracle& c : oracle_set) {
    for (int trial = 0; trial < 10000; ++trial) {
      Vec x = {5 * rng.next_gaussian(), 5 * rng.next_gaussian()};
      EvalResult ev = c.evaluate(x);
      if (!ev.violated) continue;
      CHECK(norm(ev.subgradient) <= c.subgradient_bound() * (1 + 1e-12));
    }
  }
}

TEST_CASE("per-realization descent toward any satisfied point") {
  Rng rng(7);
  ConstraintOracle oracle_set[] = {
      ConstraintOracle::affine({0.8, -0.6}, -0.5),
      ConstraintOracle::ball_distance({0, 0}, 1.0),
  };
  SimpleSet y = SimpleSet::box({-4, -4}, {4, 4});
  for (const ConstraintOracle& c : oracle_set) {
    // find a witness satisfying the constraint inside Y
    Vec w;
    do {
      w = y.project(Vec{2 * rng.next_gaussian(), 2 * rng.next_gaussian()});
    } while (c.value_at(w) > 0.0);

    for (double beta : {0.5, 1.0, 1.5, 1.999}) {
      for (int trial = 0; trial < 200; ++trial) {
        Vec x = y.project(Vec{4 * rng.next_gaussian(), 4 * rng.next_gaussian()});
        EvalResult ev = c.evaluate(x);
        Vec z = c.polyak_step(x, beta, y);
        double lhs = dist_sq(z, w);
        double decrease = ev.violated ? beta * (2 - beta) * ev.positive_part *
                                            ev.positive_part / norm_sq(ev.subgradient)
                                      : 0.0;
        CHECK(lhs <= dist_sq(x, w) - decrease + 1e-10);
      }
    }
  }
}

TEST_CASE("ball-distance at its center has no singularity") {
  // the gradient direction is undefined only where g < 0, which is never a
  // violated evaluation
  ConstraintOracle c = ConstraintOracle::ball_distance({1.0, -2.0}, 0.75);
  EvalResult ev = c.evaluate({1.0, -2.0});
  CHECK(ev.value == -0.75);
  CHECK_FALSE(ev.violated);
  CHECK(ev.subgradient == Vec{1, 0});
}

TEST_CASE("construction rejects bad oracle data") {
  CHECK_THROWS_AS(ConstraintOracle::affine({0, 0}, 1.0), ConfigError);
  CHECK_THROWS_AS(ConstraintOracle::affine({1, std::nan("")}, 1.0), ConfigError);
  CHECK_THROWS_AS(ConstraintOracle::ball_distance({0, 0}, -2.0), ConfigError);
  // user bound below the closed form is rejected, above is kept
  CHECK_THROWS_AS(ConstraintOracle::affine({3, 4}, 0.0, 4.0), ConfigError);
  CHECK(ConstraintOracle::affine({3, 4}, 0.0, 6.0).subgradient_bound() == 6.0);
}
