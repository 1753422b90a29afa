#include <doctest.h>

#include <cmath>

#include "ssp/problem_gen.hpp"
#include "ssp/reference.hpp"

using namespace ssp;

TEST_CASE("dykstra: one piece is the plain projection") {
  Rng rng(21);
  SimpleSet pieces[] = {
      SimpleSet::halfspace({0.6, -0.8}, 0.5),
      SimpleSet::box({-1, 0}, {1, 2}),
      SimpleSet::ball({0.5, 0.5}, 1.25),
  };
  for (const SimpleSet& s : pieces) {
    for (int trial = 0; trial < 30; ++trial) {
      Vec x = {4 * rng.next_gaussian(), 4 * rng.next_gaussian()};
      Vec via_dykstra = dykstra_project({s}, x);
      Vec direct = s.project(x);
      CHECK(norm(sub(via_dykstra, direct)) <= 1e-10);
    }
  }
}

TEST_CASE("dykstra: orthogonal halfspaces project componentwise") {
  std::vector<SimpleSet> pieces = {SimpleSet::halfspace({1, 0}, 0.0),
                                   SimpleSet::halfspace({0, 1}, 0.0)};
  Vec p = dykstra_project(pieces, {1, 1});
  CHECK(norm(sub(p, {0, 0})) <= 1e-10);
}

TEST_CASE("dykstra: box intersect halfspace from outside") {
  std::vector<SimpleSet> pieces = {SimpleSet::box({0, 0}, {2, 2}),
                                   SimpleSet::halfspace({1, 1}, 1.0)};  // x1+x2 <= 1
  Rng rng(17);
  Vec x = {3.0, 2.5};
  Vec p = dykstra_project(pieces, x);
  CHECK(pieces[0].distance(p) <= 1e-8);
  CHECK(pieces[1].distance(p) <= 1e-8);

  // nearest-point certificate: <x - p, y - p> <= 0 for feasible probes y
  int probes = 0;
  while (probes < 100) {
    Vec y = {3 * rng.next_double(), 3 * rng.next_double()};
    if (pieces[0].distance(y) > 0 || pieces[1].distance(y) > 0) continue;
    CHECK(dot(sub(x, p), sub(y, p)) <= 1e-8);
    ++probes;
  }

  // idempotence to tolerance
  Vec again = dykstra_project(pieces, p);
  CHECK(norm(sub(again, p)) <= 1e-8);
}

TEST_CASE("dykstra: empty intersection fails with diagnostics") {
  std::vector<SimpleSet> pieces = {SimpleSet::halfspace({1, 0}, -1.0),
                                   SimpleSet::halfspace({-1, 0}, -1.0)};
  ReferenceConfig cfg;
  cfg.dykstra_iters = 60;
  CHECK_THROWS_AS(dykstra_project(pieces, {0, 0}, cfg), ConvergenceError);
}

TEST_CASE("exact_G: closed forms") {
  std::vector<ConstraintOracle> oracles;
  oracles.push_back(ConstraintOracle::affine({1, 0}, -1.0));
  oracles.push_back(ConstraintOracle::affine({0, 1}, -1.0));
  FeasibilityProblem problem = FeasibilityProblem::checked(
      std::move(oracles), SimpleSet::whole_space(2), SamplingPlan::iid({0.3, 0.7}, 1),
      Vec{0, 0});

  CHECK(exact_G(problem, {0, 0}) == 0.0);             // feasible
  CHECK(exact_G(problem, {3, 0}) == doctest::Approx(0.3 * 2.0).epsilon(1e-14));
  CHECK(exact_G(problem, {3, 2}) == doctest::Approx(0.3 * 2.0 + 0.7 * 1.0).epsilon(1e-14));
}

TEST_CASE("exact_G matches a Monte Carlo estimate") {
  FeasibilityProblem problem = gen_linear(6, 20, Conditioning::generic, 0.0, 303);
  Rng rng(1);
  Vec x(6);
  for (double& v : x) v = 2 * rng.next_gaussian();

  const int draws = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  Rng sample_rng(2);
  for (int i = 0; i < draws; ++i) {
    int w = problem.plan.draw_single(sample_rng);
    double gplus = std::max(0.0, problem.oracles[w].value_at(x));
    sum += gplus;
    sum_sq += gplus * gplus;
  }
  double mc_mean = sum / draws;
  double mc_sigma = std::sqrt((sum_sq / draws - mc_mean * mc_mean) / draws);
  CHECK(std::abs(exact_G(problem, x) - mc_mean) <= 4.0 * mc_sigma);
}

TEST_CASE("exact_G is convex along segments") {
  FeasibilityProblem problem = gen_linear(5, 15, Conditioning::generic, 0.0, 71);
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Vec u(5), v(5);
    for (double& a : u) a = 3 * rng.next_gaussian();
    for (double& a : v) a = 3 * rng.next_gaussian();
    double lambda = rng.next_double();
    Vec mix(5);
    for (int i = 0; i < 5; ++i) mix[i] = lambda * u[i] + (1 - lambda) * v[i];
    CHECK(exact_G(problem, mix) <=
          lambda * exact_G(problem, u) + (1 - lambda) * exact_G(problem, v) + 1e-10);
  }
}

TEST_CASE("estimate_c: single unit halfspace gives exactly one") {
  std::vector<ConstraintOracle> oracles;
  oracles.push_back(ConstraintOracle::affine({1, 0}, 0.0));  // x1 <= 0
  FeasibilityProblem problem = FeasibilityProblem::checked(
      std::move(oracles), SimpleSet::whole_space(2), SamplingPlan::iid({1.0}, 1),
      Vec{-1, 0});
  ReferenceConfig cfg;
  cfg.c_sample_points = 200;
  cfg.c_seed = 5;
  double c_hat = estimate_c(problem, cfg);
  CHECK(c_hat == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("estimate_c: orthogonal pair stays finite and certifies the norm bound") {
  std::vector<ConstraintOracle> oracles;
  oracles.push_back(ConstraintOracle::affine({1, 0}, 0.0));
  oracles.push_back(ConstraintOracle::affine({0, 1}, 0.0));
  FeasibilityProblem problem = FeasibilityProblem::checked(
      std::move(oracles), SimpleSet::whole_space(2), SamplingPlan::iid({0.5, 0.5}, 1),
      Vec{-1, -1});
  ReferenceConfig cfg;
  cfg.c_sample_points = 300;
  cfg.c_seed = 8;
  double c_hat = estimate_c(problem, cfg);
  CHECK(std::isfinite(c_hat));
  double mg = problem.subgradient_bound();
  CHECK(c_hat * mg * mg >= 1.0 - 1e-6);

  // a max over a nested sample is monotone in the sample count
  ReferenceConfig smaller = cfg;
  smaller.c_sample_points = 100;
  CHECK(estimate_c(problem, smaller) <= c_hat + 1e-15);
}

TEST_CASE("estimate_c: all-feasible probes are an error") {
  std::vector<ConstraintOracle> oracles;
  oracles.push_back(ConstraintOracle::affine({1, 0}, -100.0));  // x1 <= 100
  FeasibilityProblem problem = FeasibilityProblem::checked(
      std::move(oracles), SimpleSet::box({-1, -1}, {1, 1}), SamplingPlan::iid({1.0}, 1),
      Vec{0, 0});
  ReferenceConfig cfg;
  cfg.c_sample_points = 50;
  CHECK_THROWS_AS(estimate_c(problem, cfg), ConfigError);
}

TEST_CASE("estimate_c: norm-bound audit on generated instances") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    FeasibilityProblem problem = gen_linear(6, 18, Conditioning::generic, 0.2, seed);
    ReferenceConfig cfg;
    cfg.c_sample_points = 200;
    cfg.c_seed = seed;
    double c_hat = estimate_c(problem, cfg);
    double mg = problem.subgradient_bound();
    CHECK(c_hat * mg * mg >= 1.0 - 1e-6);
  }
}

TEST_CASE("estimate_c: parallel probes agree with serial") {
  FeasibilityProblem problem = gen_linear(5, 12, Conditioning::generic, 0.1, 88);
  ReferenceConfig serial;
  serial.c_sample_points = 120;
  serial.c_seed = 3;
  ReferenceConfig parallel = serial;
  parallel.workers = 4;
  CHECK(estimate_c(problem, serial) == estimate_c(problem, parallel));
}

TEST_CASE("estimate_c: worker failures propagate as exceptions") {
  FeasibilityProblem problem = gen_linear(5, 12, Conditioning::generic, 0.1, 88);
  ReferenceConfig cfg;
  cfg.c_sample_points = 40;
  cfg.workers = 4;
  cfg.dykstra_iters = 1;  // every infeasible probe exhausts the budget
  CHECK_THROWS_AS(estimate_c(problem, cfg), ConvergenceError);
}
