#pragma once

#include <string_view>

#include "agils/problem.hpp"

namespace agils {

enum class InnerMethod { PGM, FISTA, ADMM };

std::string_view to_string(InnerMethod method);
/// Case-insensitive; throws std::invalid_argument on unknown names.
InnerMethod parse_inner_method(std::string_view name);

enum class InnerStatus { Converged, MaxIterExceeded };

struct InnerResult {
  Vector theta;
  double residual = 0.0;  // residual of `theta` under the solve's stopping measure
  int iterations = 0;     // every inner step taken, including restarts
  InnerStatus status = InnerStatus::Converged;

  bool converged() const { return status == InnerStatus::Converged; }
};

/// Default iteration cap for a problem with lower-level dimension m.
inline int default_inner_max_iter(int m) { return 10 * m + 1000; }

/// f(x, theta) + g(x, theta) + |theta - y|^2 / (2 gamma).
double prox_ll_objective(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                         double gamma, const Vector& theta);

/// Step used by the gradient-type inner solvers: 1/(L_fy + 1/gamma).
double prox_ll_step(const ProblemConstants& c, double gamma);

/// Approximates theta*_gamma(x, y) = argmin_{theta in Y} f(x,theta) + g(x,theta)
/// + |theta - y|^2/(2 gamma) until prox_grad_residual(theta) <= target.
/// At least one step is taken even when `warm` already meets the target.
///
/// The returned theta is always in Y. On MaxIterExceeded the result carries the
/// iterate with the smallest residual seen. ADMM requires an oracle with
/// has_smooth_prox(); it throws std::invalid_argument otherwise.
InnerResult solve_prox_ll(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                          double gamma, double eta, double target, const Vector& warm,
                          InnerMethod method, int max_iter);

/// Exactly one proximal-gradient step on the proximal lower-level problem from
/// `warm`, regardless of any target. Reports the residual of the new point.
InnerResult prox_ll_single_step(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                                double gamma, double eta, const Vector& warm);

/// Approximates argmin_{y in Y} f(x, y) + g(x, y) with restarted FISTA until
/// unit_step_ll_residual <= target.
InnerResult solve_ll(const BilevelOracle& oracle, const Vector& x, double target,
                     const Vector& warm, int max_iter);

}  // namespace agils
