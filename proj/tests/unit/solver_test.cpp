#include <doctest.h>

#include <cmath>

#include "agils/envelope.hpp"
#include "agils/solver.hpp"
#include "agils/toy.hpp"
#include "quadratic.hpp"

using namespace agils;
using agils::testing::QuadraticOracle;
using agils::testing::vec;

namespace {

AgilsConfig resolved_toy(int n) {
  const ToyInstance toy = make_toy(n);
  return toy_default_config(n).resolved(toy.constants(), toy.dims());
}

SolveHooks toy_hooks(const ToyInstance& toy) {
  SolveHooks h;
  h.metric = [&toy](const Vector& x, const Vector& y) { return toy_error(toy, x, y); };
  return h;
}

}  // namespace

TEST_CASE("enum names round-trip") {
  for (auto v : {InexactnessVariant::Both, InexactnessVariant::AbsoluteOnly, InexactnessVariant::RelativeOnly,
                 InexactnessVariant::NearExact, InexactnessVariant::SingleStep}) {
    CHECK(parse_variant(to_string(v)) == v);
  }
  for (auto r : {StopRule::MaxResidual, StopRule::RelChangeAndT, StopRule::MetricBelow}) {
    CHECK(parse_stop_rule(to_string(r)) == r);
  }
  for (auto c : {CaseTaken::Case1, CaseTaken::Case2, CaseTaken::Case3Accepted, CaseTaken::Case3Rejected}) {
    CHECK(parse_case(to_string(c)) == c);
  }
  CHECK_THROWS_AS(parse_variant("Sometimes"), std::invalid_argument);
}

TEST_CASE("inexactness schedules") {
  AgilsConfig cfg;
  cfg.s0 = 0.05;
  cfg.p_s = 1.05;
  cfg.tau0 = 20.0;
  cfg.p_tau = 0.7;

  cfg.variant = InexactnessVariant::Both;
  CHECK(inexactness_target(0, cfg, 0.0) == doctest::Approx(0.05));

  cfg.variant = InexactnessVariant::AbsoluteOnly;
  CHECK(inexactness_target(3, cfg, 123.0) == doctest::Approx(0.011664).epsilon(1e-4));
  CHECK(inexactness_target(3, cfg, 123.0) == doctest::Approx(0.05 / std::pow(4.0, 1.05)));

  cfg.variant = InexactnessVariant::RelativeOnly;
  CHECK(inexactness_target(1, cfg, 0.1) == doctest::Approx(1.2311).epsilon(1e-4));
  CHECK(inexactness_target(1, cfg, 0.0) > 0.0);

  cfg.variant = InexactnessVariant::Both;
  CHECK(inexactness_target(1, cfg, 0.1) == doctest::Approx(20.0 / std::pow(2.0, 0.7) * 0.1));

  cfg.variant = InexactnessVariant::NearExact;
  CHECK(inexactness_target(5, cfg, 1.0) == 1e-10);

  cfg.variant = InexactnessVariant::SingleStep;
  CHECK(std::isinf(inexactness_target(5, cfg, 1.0)));
}

TEST_CASE("directions and updates") {
  const Vector c = vec({1.0, -1.0});
  const QuadraticOracle zero(vec({1.0, 1.0}), c, Vector::Zero(2), 0.0, false);
  const Vector x = vec({0.2, 0.4});

  SUBCASE("y direction") {
    // F = 0, f stationary at c, theta = y: nothing moves
    CHECK(direction_y(zero, x, c, c, 2.0, 0.5).norm() == 0.0);
    const Vector w = vec({0.3, -0.7});
    const Vector yt = vec({0.5, 0.5});
    const Vector base = direction_y(zero, x, yt, yt, 2.0, 0.5);
    CHECK((direction_y(zero, x, yt, yt - 0.5 * w, 2.0, 0.5) - (base - w)).norm() < 1e-15);
  }
  SUBCASE("y update") {
    const Vector yt = vec({0.5, 0.5}), d = vec({1.0, 2.0});
    CHECK((update_y(zero, x, yt, d, 0.1) - (yt - 0.1 * d)).norm() < 1e-15);
    CHECK(update_y(zero, x, yt, Vector::Zero(2), 0.1) == yt);
  }
  SUBCASE("x direction") {
    const ToyInstance toy = make_toy(4);
    const Vector xt = Vector::Constant(4, 0.5);
    const Vector yn = vec({-0.5, 1.0, 0.2, -0.1});
    const Vector th = vec({0.3, -0.4, 0.0, 2.0});
    CHECK(direction_x(toy, xt, yn, yn, 0.7).norm() == 0.0);
    CHECK((direction_x(toy, xt, yn, th, 0.7) - (yn.cwiseAbs() - th.cwiseAbs())).norm() < 1e-15);
  }
  SUBCASE("x update") {
    const ToyInstance toy = make_toy(2);
    CHECK(update_x(toy, vec({0.3, 0.6}), Vector::Zero(2), 0.9) == vec({0.3, 0.6}));
    CHECK(update_x(toy, vec({0.3, 0.6}), vec({-10.0, 10.0}), 0.9) == vec({1.0, 0.0}));
  }
}

TEST_CASE("constraint violation estimate") {
  const ToyInstance toy = make_toy(4);
  const Vector x = Vector::Constant(4, 0.3), y = vec({0.1, 0.2, -0.3, 0.4});
  CHECK(constraint_violation_estimate(toy, x, y, y, 1.0, 1e-6) == 0.0);

  const Vector xs = vec({0.0, 0.0, 1.0, 1.0});
  const InnerResult ll = solve_ll(toy, xs, 1e-12, toy.a(), 100000);
  const MoreauEnvelope v = moreau_envelope(toy, xs, ll.theta, 1.0);
  CHECK(constraint_violation_estimate(toy, xs, ll.theta, v.solve.theta, 1.0, 1e-6) == 0.0);
  CHECK_THROWS(constraint_violation_estimate(toy, x, y, y, 0.0, 0.0));
}

TEST_CASE("penalty case logic") {
  AgilsConfig cfg;
  cfg.gamma = 1.0;
  cfg.c_p = 1.0;
  cfg.c_y = 1.0;
  CHECK(classify_penalty_case(0.0, 0.0, 10.0, 100.0, cfg) == PenaltyCase::KeepPenalty);
  CHECK(classify_penalty_case(0.05, 5.0, 10.0, 0.0, cfg) == PenaltyCase::IncreasePenalty);
  CHECK(classify_penalty_case(0.05, 5.0, 10.0, 1e6, cfg) == PenaltyCase::Correct);
  CHECK(classify_penalty_case(0.1, 5.0, 10.0, 1e6, cfg) == PenaltyCase::KeepPenalty);
}

TEST_CASE("stop rules") {
  AgilsConfig cfg;
  cfg.stop_rule = StopRule::MaxResidual;
  cfg.tol = 1e-4;
  cfg.s0 = 1e-5;
  CHECK(should_stop({1, 1e-5, 0.0, 0.0, 0.0}, cfg));
  CHECK_FALSE(should_stop({1, 0.0, 0.2, 0.0, 0.0}, cfg));
  CHECK_FALSE(should_stop({0, 0.0, 0.0, 0.0, 0.0}, cfg));

  cfg.stop_rule = StopRule::RelChangeAndT;
  cfg.rel_tol = 0.005 / 300;
  cfg.t_tol = 0.1;
  CHECK(should_stop({5, 0.0, 0.05, 0.004 / 300, 0.0}, cfg));
  CHECK_FALSE(should_stop({5, 0.0, 0.15, 0.004 / 300, 0.0}, cfg));
  CHECK_FALSE(should_stop({5, 0.0, 0.05, 0.006 / 300, 0.0}, cfg));

  cfg.stop_rule = StopRule::MetricBelow;
  cfg.metric_tol = 0.005;
  CHECK(should_stop({2, 1.0, 1.0, 1.0, 0.004}, cfg));
  CHECK_FALSE(should_stop({2, 0.0, 0.0, 0.0, 0.006}, cfg));
}

TEST_CASE("configuration validation names the field") {
  const ToyInstance toy = make_toy(4);
  AgilsConfig cfg = toy_default_config(4);
  cfg.p0 = -1.0;
  CHECK_THROWS_WITH_AS(cfg.resolved(toy.constants(), toy.dims()), doctest::Contains("p0"), std::invalid_argument);
  cfg = toy_default_config(4);
  cfg.gamma = 2.0;
  CHECK_THROWS_WITH_AS(cfg.resolved(toy.constants(), toy.dims()), doctest::Contains("gamma"), std::invalid_argument);
  cfg = toy_default_config(4);
  cfg.strict_gamma = true;
  CHECK_THROWS(cfg.resolved(toy.constants(), toy.dims()));
  cfg.gamma = 0.9;
  CHECK_NOTHROW(cfg.resolved(toy.constants(), toy.dims()));

  const AgilsConfig r = resolved_toy(200);
  CHECK(*r.gamma == 1.0);
  CHECK(*r.eta == doctest::Approx(1.0 / 201.0));
  CHECK(r.c_ytilde == doctest::Approx(50.0 * std::sqrt(200.0)));

  AgilsConfig metric = toy_default_config(4);
  CHECK_THROWS(agils_solve(toy, metric, toy.default_init()));
}

TEST_CASE("feasibility correction accepts an exact lower-level point when F = 0") {
  const QuadraticOracle q(vec({1.0, 0.5}), vec({1.0, -1.0}), Vector::Zero(2), 0.0, true);
  AgilsConfig cfg;
  cfg.gamma = 1.0;
  const AgilsSolver solver(q, cfg);
  IterateState s = solver.initial_state({vec({0.2, 0.2}), vec({3.0, 3.0}), vec({3.0, 3.0})});
  const Vector x_next = vec({0.2, 0.2});
  const Vector y_next = vec({3.0, 3.0});
  const Vector theta_next = solver.inner_solve(x_next, y_next, 1e-10, y_next).theta;
  const auto out = solver.feasibility_correction(s, x_next, y_next, theta_next, 1e-12);
  CHECK(out.accepted);
  CHECK(out.p == s.p);
  CHECK(unit_step_ll_residual(q, x_next, out.y_tilde) < 1e-6);
}

TEST_CASE("penalty step applies each case") {
  const QuadraticOracle q(vec({1.0, 0.5}), vec({1.0, -1.0}), Vector::Zero(2), 1.0, true);
  AgilsConfig cfg;
  cfg.gamma = 1.0;
  cfg.p0 = 10.0;
  cfg.rho_p = 0.25;
  const AgilsSolver solver(q, cfg);
  const IterateState s = solver.initial_state({vec({0.2, 0.2}), vec({1.0, 1.0}), vec({1.0, 1.0})});
  IterateState n;
  n.x = s.x;
  n.y = vec({1.0, 1.0});
  n.theta = n.y;

  n.delta = 0.05;
  n.t = 5.0;
  solver.penalty_and_correction_step(s, n);
  CHECK(n.case_taken == CaseTaken::Case2);
  CHECK(n.p == 10.25);
  CHECK(n.y_tilde == n.y);

  n.t = 0.0;
  solver.penalty_and_correction_step(s, n);
  CHECK(n.case_taken == CaseTaken::Case1);
  CHECK(n.p == 10.0);

  n.t = 5.0;
  n.theta = vec({100.0, -100.0});
  solver.penalty_and_correction_step(s, n);
  CHECK((n.case_taken == CaseTaken::Case3Accepted || n.case_taken == CaseTaken::Case3Rejected));
  CHECK((n.p == 10.0 || n.p == 10.25));
}

TEST_CASE("a feasible stationary start stops at the second check") {
  const Vector c = vec({1.0, -2.0});
  const QuadraticOracle q(vec({1.0, 0.5}), c, Vector::Zero(2), 0.0, false);
  AgilsConfig cfg;
  cfg.gamma = 1.0;
  cfg.s0 = 1e-8;
  const AgilsResult r = agils_solve(q, cfg, {vec({0.5, 0.5}), c, c});
  CHECK(r.trace.termination == Termination::Converged);
  CHECK(r.trace.outer_iterations == 2);
  CHECK(r.trace.records.back().delta < 1e-12);
  CHECK(r.trace.records.back().t == 0.0);
}

TEST_CASE("toy n=200 default run") {
  const ToyInstance toy = make_toy(200);
  const AgilsResult r = agils_solve(toy, toy_default_config(200), toy.default_init(), toy_hooks(toy));
  CHECK(r.trace.termination == Termination::Converged);
  CHECK(toy_error(toy, r.x, r.final_state.y) < 0.005);
  CHECK(r.trace.corrections == 0);
  CHECK(r.trace.inner_failures == 0);
  CHECK(r.trace.inner_to_outer_ratio() ==
        doctest::Approx(double(r.trace.total_inner_iterations) / r.trace.outer_iterations));

  double p = toy_default_config(200).p0;
  for (const auto& rec : r.trace.records) {
    CHECK(rec.p == p);
    CHECK(rec.case_taken != CaseTaken::Case3Accepted);
    CHECK(rec.case_taken != CaseTaken::Case3Rejected);
    CHECK(rec.G_half <= rec.target_half);
    CHECK(rec.G_full <= rec.target_full);
    if (rec.case_taken == CaseTaken::Case2) p += 0.02;
  }

  // the recorded violation estimate never exceeds the exit gap
  const double gap = envelope_gap(toy, r.x, r.y_tilde, 1.0);
  CHECK(r.trace.records.back().t <= gap + 1e-9);
}

TEST_CASE("trace flushing delivers every record once") {
  const ToyInstance toy = make_toy(200);
  AgilsConfig cfg = toy_default_config(200);
  cfg.trace_flush_every = 7;
  std::vector<IterationRecord> seen;
  int batches = 0;
  SolveHooks h = toy_hooks(toy);
  h.on_flush = [&](std::span<const IterationRecord> b) {
    ++batches;
    seen.insert(seen.end(), b.begin(), b.end());
  };
  const AgilsResult r = agils_solve(toy, cfg, toy.default_init(), h);
  REQUIRE(seen.size() == r.trace.records.size());
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i].k == static_cast<int>(i));
  CHECK(batches == (static_cast<int>(seen.size()) + 6) / 7);
}

TEST_CASE("max outer iterations is reported") {
  const ToyInstance toy = make_toy(200);
  AgilsConfig cfg = toy_default_config(200);
  cfg.max_outer = 5;
  const AgilsResult r = agils_solve(toy, cfg, toy.default_init(), toy_hooks(toy));
  CHECK(r.trace.termination == Termination::MaxOuterExceeded);
  CHECK(r.trace.outer_iterations == 5);
}
