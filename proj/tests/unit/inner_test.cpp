#include <doctest.h>

#include "agils/inner.hpp"
#include "agils/prox.hpp"
#include "agils/rng.hpp"
#include "agils/toy.hpp"
#include "quadratic.hpp"

using namespace agils;
using agils::testing::QuadraticOracle;
using agils::testing::vec;

namespace {

const InnerMethod kMethods[] = {InnerMethod::PGM, InnerMethod::FISTA, InnerMethod::ADMM};

}  // namespace

TEST_CASE("inner method names") {
  for (auto m : kMethods) CHECK(parse_inner_method(to_string(m)) == m);
  CHECK(parse_inner_method("fista") == InnerMethod::FISTA);
  CHECK_THROWS_AS(parse_inner_method("newton"), std::invalid_argument);
}

TEST_CASE("isotropic quadratic reaches the analytic minimizer") {
  const Vector c = vec({1.0, -2.0, 0.5});
  const QuadraticOracle q(Vector::Ones(3), c, Vector::Zero(3), 0.0, false);
  const Vector x = Vector::Zero(3), y = vec({0.3, 0.3, -1.0});
  const double gamma = 0.7, eta = prox_ll_step(q.constants(), gamma);
  const Vector expected = (gamma * c + y) / (1.0 + gamma);
  for (auto m : kMethods) {
    CAPTURE(to_string(m));
    const InnerResult r = solve_prox_ll(q, x, y, gamma, eta, 1e-12, Vector::Zero(3), m, 10000);
    REQUIRE(r.converged());
    CHECK((r.theta - expected).norm() < 1e-8);
  }
}

TEST_CASE("exact warm start returns after at most one step") {
  const QuadraticOracle q(vec({0.2, 1.0}), vec({1.0, -1.0}), Vector::Zero(2), 0.0, false);
  const Vector x = Vector::Zero(2), y = vec({2.0, 0.0});
  const double gamma = 1.0, eta = prox_ll_step(q.constants(), gamma);
  const Vector star = q.theta_star(y, gamma);
  for (auto m : kMethods) {
    CAPTURE(to_string(m));
    const InnerResult r = solve_prox_ll(q, x, y, gamma, eta, 1e-10, star, m, 100);
    CHECK(r.converged());
    CHECK(r.iterations <= 1);
    CHECK(r.residual <= 1e-10);
  }
}

TEST_CASE("methods agree on the toy at a tight target") {
  const ToyInstance toy = make_toy(4);
  CounterRng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x(4), y(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = rng.uniform();
      y[i] = rng.normal();
    }
    const double gamma = 1.0, eta = prox_ll_step(toy.constants(), gamma), target = 1e-10;
    std::vector<Vector> sol;
    for (auto m : kMethods) {
      const InnerResult r = solve_prox_ll(toy, x, y, gamma, eta, target, y, m, 200000);
      REQUIRE(r.converged());
      CHECK(prox_grad_residual(toy, x, r.theta, y, gamma, eta) <= target);
      sol.push_back(r.theta);
    }
    CHECK((sol[0] - sol[1]).norm() <= 10 * target);
    CHECK((sol[0] - sol[2]).norm() <= 10 * target);
    CHECK((sol[1] - sol[2]).norm() <= 10 * target);
  }
}

TEST_CASE("PGM objective is nonincreasing") {
  const ToyInstance toy = make_toy(6);
  const Vector x = vec({0.1, 0.9, 0.4, 0.0, 0.7, 0.3});
  const Vector y = vec({1.0, -1.0, 0.5, 0.2, -0.3, 2.0});
  const double gamma = 1.0, eta = prox_ll_step(toy.constants(), gamma);
  Vector theta = Vector::Zero(6);
  double prev = prox_ll_objective(toy, x, y, gamma, theta);
  for (int it = 1; it <= 200; ++it) {
    // max_iter = 1 from the previous iterate is a single PGM step
    theta = solve_prox_ll(toy, x, y, gamma, eta, 1e-300, theta, InnerMethod::PGM, 1).theta;
    const double obj = prox_ll_objective(toy, x, y, gamma, theta);
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("iteration cap reports the best iterate") {
  const ToyInstance toy = make_toy(4);
  const Vector x = Vector::Zero(4), y = vec({3.0, -3.0, 3.0, -3.0});
  const double gamma = 1.0, eta = prox_ll_step(toy.constants(), gamma);
  const InnerResult r = solve_prox_ll(toy, x, y, gamma, eta, 1e-14, Vector::Zero(4), InnerMethod::PGM, 3);
  CHECK(r.status == InnerStatus::MaxIterExceeded);
  CHECK(r.iterations == 3);
  CHECK(r.residual == doctest::Approx(prox_grad_residual(toy, x, r.theta, y, gamma, eta)));
}

TEST_CASE("argument validation") {
  const ToyInstance toy = make_toy(2);
  const Vector x = Vector::Zero(2), y = Vector::Zero(2);
  CHECK_THROWS(solve_prox_ll(toy, x, y, 0.0, 1.0, 1e-6, y, InnerMethod::PGM, 10));
  CHECK_THROWS(solve_prox_ll(toy, x, y, 1.0, 1.0, 0.0, y, InnerMethod::PGM, 10));
  Vector bad = y;
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS(solve_prox_ll(toy, x, y, 1.0, 1.0, 1e-6, bad, InnerMethod::PGM, 10));
  CHECK_THROWS(solve_ll(toy, x, -1.0, y, 10));
}

TEST_CASE("single step ignores any target") {
  const ToyInstance toy = make_toy(4);
  const Vector x = Vector::Zero(4), y = vec({1.0, 1.0, 1.0, 1.0});
  const double gamma = 1.0, eta = prox_ll_step(toy.constants(), gamma);
  const InnerResult r = prox_ll_single_step(toy, x, y, gamma, eta, y);
  CHECK(r.iterations == 1);
  CHECK(r.converged());
  const InnerResult capped = solve_prox_ll(toy, x, y, gamma, eta, 1e-300, y, InnerMethod::PGM, 1);
  CHECK(r.theta == capped.theta);
}

TEST_CASE("lower-level solve") {
  SUBCASE("quadratic with g = 0 returns its center") {
    const Vector c = vec({1.0, -2.0});
    const QuadraticOracle q(vec({1.0, 0.5}), c, Vector::Zero(2), 0.0, false);
    const InnerResult r = solve_ll(q, Vector::Zero(2), 1e-12, Vector::Zero(2), 10000);
    REQUIRE(r.converged());
    CHECK((r.theta - c).norm() < 1e-10);
    const InnerResult again = solve_ll(q, Vector::Zero(2), 1e-12, r.theta, 10000);
    CHECK(again.iterations <= 1);
  }
  SUBCASE("toy at x = 1 shrinks every coordinate toward zero") {
    const ToyInstance toy = make_toy(4);
    const Vector x = Vector::Ones(4);
    const InnerResult r = solve_ll(toy, x, 1e-10, toy.a(), 100000);
    REQUIRE(r.converged());
    CHECK(unit_step_ll_residual(toy, x, r.theta) <= 1e-10);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(r.theta[i]) < std::abs(toy.a()[i]));
  }
  SUBCASE("toy at x = 0 recovers a") {
    const ToyInstance toy = make_toy(4);
    const InnerResult r = solve_ll(toy, Vector::Zero(4), 1e-12, Vector::Zero(4), 100000);
    REQUIRE(r.converged());
    CHECK((r.theta - toy.a()).norm() < 1e-9);
  }
}

TEST_CASE("inner solves are deterministic") {
  const ToyInstance toy = make_toy(6);
  const Vector x = Vector::Constant(6, 0.3), y = Vector::LinSpaced(6, -1.0, 1.0);
  for (auto m : kMethods) {
    const InnerResult a = solve_prox_ll(toy, x, y, 1.0, 1.0 / 7.0, 1e-9, y, m, 100000);
    const InnerResult b = solve_prox_ll(toy, x, y, 1.0, 1.0 / 7.0, 1e-9, y, m, 100000);
    CHECK(a.theta == b.theta);
    CHECK(a.iterations == b.iterations);
  }
}
