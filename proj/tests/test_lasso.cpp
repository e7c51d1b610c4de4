#include <doctest.h>

#include "test_support.hpp"

using namespace lassodual;
using lassodual::testing::orthonormal_dictionary;
using lassodual::testing::random_cxvec;
using lassodual::testing::random_instance;

TEST_CASE("complex soft threshold") {
  CHECK(complex_soft_threshold(cxd(0.0, 0.0), 1.0) == cxd(0.0, 0.0));
  CHECK(complex_soft_threshold(cxd(3.0, 4.0), 5.0) == cxd(0.0, 0.0));
  const cxd shrunk = complex_soft_threshold(cxd(3.0, 4.0), 2.5);
  CHECK(std::abs(shrunk - cxd(1.5, 2.0)) < 1e-15);
  // phase preserved
  const cxd v(-0.3, 0.7);
  const cxd s = complex_soft_threshold(v, 0.2);
  CHECK(std::abs(std::arg(s) - std::arg(v)) < 1e-14);
}

TEST_CASE("weight matrix rejects non-positive entries") {
  RealVec d(3);
  d << 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(WeightMatrix{d}, InvalidInput);
}

TEST_CASE("solve: degenerate inputs") {
  const SteeringDictionary dict(AngleGrid::uniform(16), 8);
  const WeightMatrix w = WeightMatrix::identity(16);

  LassoProblem zero_y{&dict, w, CxVec::Zero(8), 0.7};
  const PrimalSolution sol = solve(zero_y);
  CHECK(sol.x.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.objective == 0.0);

  LassoProblem bad_mu{&dict, w, CxVec::Zero(8), 0.0};
  CHECK_THROWS_AS(solve(bad_mu), InvalidInput);
}

TEST_CASE("solve: zero solution above mu_max, nonzero below") {
  auto inst = random_instance(16, 64, 3, 20.0, 5);
  const double mm = mu_max(inst.dict, inst.weights, inst.y);
  {
    LassoProblem p{&inst.dict, inst.weights, inst.y, 1.01 * mm};
    const PrimalSolution sol = solve(p);
    CHECK(sol.x.cwiseAbs().maxCoeff() == 0.0);
  }
  {
    LassoProblem p{&inst.dict, inst.weights, inst.y, 0.99 * mm};
    const PrimalSolution sol = solve(p);
    CHECK(primal_active_set(sol.x).size() >= 1);
  }
}

TEST_CASE("solve: orthonormal dictionary matches the closed form") {
  const SteeringDictionary dict = orthonormal_dictionary(16);
  const WeightMatrix w = WeightMatrix::identity(16);
  std::mt19937_64 rng(11);
  const CxVec y = random_cxvec(16, rng);
  const double mu = 0.8;

  const CxVec corr = dict.entries().adjoint() * y;
  CxVec closed(16);
  for (int m = 0; m < 16; ++m) closed(m) = complex_soft_threshold(corr(m), mu / 2.0);

  LassoProblem p{&dict, w, y, mu};
  const PrimalSolution sol = solve(p);
  CHECK(sol.converged);
  CHECK((sol.x - closed).cwiseAbs().maxCoeff() < 1e-8);

  const PrimalSolution oracle = oracle_solve(p, 200000);
  CHECK((oracle.x - closed).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(oracle.objective - lasso_objective(p, closed)) <
        1e-8 * std::max(1.0, oracle.objective));
}

TEST_CASE("solve agrees with the oracle on random instances") {
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = random_instance(16, 32, 3, 20.0, 100 + trial);
    const double mm = mu_max(inst.dict, inst.weights, inst.y);
    LassoProblem p{&inst.dict, inst.weights, inst.y, 0.3 * mm};
    const PrimalSolution fast = solve(p);
    const PrimalSolution slow = oracle_solve(p, 300000);
    CHECK(fast.converged);
    CHECK(std::abs(fast.objective - slow.objective) <= 1e-5 * slow.objective);
  }
}

TEST_CASE("KKT conditions hold for converged solutions") {
  for (int trial = 0; trial < 8; ++trial) {
    auto inst = random_instance(16, 64, 4, 30.0, 200 + trial);
    const double mm = mu_max(inst.dict, inst.weights, inst.y);
    const double mu = (0.1 + 0.1 * trial) * mm;
    LassoProblem p{&inst.dict, inst.weights, inst.y, mu};
    const PrimalSolution sol = solve(p);
    REQUIRE(sol.converged);

    const CxVec u = dual_from_primal(inst.dict, inst.weights, inst.y, sol.x, mu).u;
    CHECK(u.cwiseAbs().maxCoeff() <= mu * (1.0 + 1e-6));
    const double delta = 1e-6 * sol.x.cwiseAbs().maxCoeff();
    for (int m = 0; m < sol.x.size(); ++m) {
      if (std::abs(sol.x(m)) <= delta) continue;
      CHECK(std::abs(std::abs(u(m)) - mu) <= 1e-4 * mu);
      double phase = std::arg(u(m)) - std::arg(sol.x(m));
      while (phase > kPi) phase -= 2.0 * kPi;
      while (phase <= -kPi) phase += 2.0 * kPi;
      CHECK(std::abs(phase) <= 1e-4);
    }
  }
}

TEST_CASE("scaling covariance: (c y, c mu) scales x by c") {
  auto inst = random_instance(16, 32, 3, 25.0, 33);
  const double mm = mu_max(inst.dict, inst.weights, inst.y);
  const double mu = 0.4 * mm;
  const double c = 3.7;

  LassoProblem p1{&inst.dict, inst.weights, inst.y, mu};
  LassoProblem p2{&inst.dict, inst.weights, c * inst.y, c * mu};
  const PrimalSolution s1 = solve(p1);
  const PrimalSolution s2 = solve(p2);
  CHECK((s2.x - c * s1.x).norm() <= 1e-8 * std::max(1.0, (c * s1.x).norm()));
}

TEST_CASE("objective running average is non-increasing") {
  auto inst = random_instance(16, 48, 3, 20.0, 77);
  const double mm = mu_max(inst.dict, inst.weights, inst.y);
  LassoProblem p{&inst.dict, inst.weights, inst.y, 0.3 * mm};
  const PrimalSolution sol = solve(p);
  REQUIRE(sol.objective_history.size() > 2);

  double running = sol.objective_history[0];
  int count = 1;
  double prev = running;
  for (std::size_t i = 1; i < sol.objective_history.size(); ++i) {
    running = (running * count + sol.objective_history[i]) / (count + 1);
    ++count;
    CHECK(running <= prev * (1.0 + 1e-12) + 1e-12);
    prev = running;
  }
}

TEST_CASE("warm start reaches the same solution") {
  auto inst = random_instance(16, 48, 3, 30.0, 90);
  const double mm = mu_max(inst.dict, inst.weights, inst.y);
  LassoProblem hi{&inst.dict, inst.weights, inst.y, 0.5 * mm};
  LassoProblem lo{&inst.dict, inst.weights, inst.y, 0.3 * mm};
  const PrimalSolution cold = solve(lo);
  const PrimalSolution warm = solve(lo, SolverOptions{}, solve(hi).x);
  CHECK((cold.x - warm.x).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("objective field is consistent with the returned x") {
  auto inst = random_instance(16, 32, 2, 20.0, 55);
  const double mm = mu_max(inst.dict, inst.weights, inst.y);
  LassoProblem p{&inst.dict, inst.weights, inst.y, 0.45 * mm};
  const PrimalSolution sol = solve(p);
  CHECK(std::abs(sol.objective - lasso_objective(p, sol.x)) <=
        1e-10 * std::max(1.0, sol.objective));
}
