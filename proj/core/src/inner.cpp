#include "agils/inner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "agils/prox.hpp"

namespace agils {

std::string_view to_string(InnerMethod method) {
  switch (method) {
    case InnerMethod::PGM: return "PGM";
    case InnerMethod::FISTA: return "FISTA";
    case InnerMethod::ADMM: return "ADMM";
  }
  return "?";
}

InnerMethod parse_inner_method(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "PGM") return InnerMethod::PGM;
  if (upper == "FISTA") return InnerMethod::FISTA;
  if (upper == "ADMM") return InnerMethod::ADMM;
  throw std::invalid_argument("unknown inner method '" + std::string(name) + "'");
}

namespace {

// The proximal lower-level problem at fixed (x, y).
struct ProxLl {
  const BilevelOracle& oracle;
  const Vector& x;
  const Vector& y;
  double gamma;

  Vector grad(const Vector& theta) const {
    return oracle.lower_smooth_gradient(x, theta).y + (theta - y) / gamma;
  }
  Vector step(const Vector& theta, double s) const {
    return oracle.prox_lower_nonsmooth(x, theta - s * grad(theta), s);
  }
  double residual(const Vector& theta, double eta) const { return (theta - step(theta, eta)).norm(); }
  double objective(const Vector& theta) const {
    return prox_ll_objective(oracle, x, y, gamma, theta);
  }
};

// Keeps the iterate with the smallest residual for MaxIterExceeded reports.
struct Best {
  Vector theta;
  double residual = std::numeric_limits<double>::infinity();

  void offer(const Vector& candidate, double r) {
    if (r < residual) {
      residual = r;
      theta = candidate;
    }
  }
  InnerResult fail(int iterations) && {
    return {std::move(theta), residual, iterations, InnerStatus::MaxIterExceeded};
  }
};

void check_prox_ll_args(double gamma, double eta, double target, const Vector& warm) {
  if (!(gamma > 0.0) || !(eta > 0.0)) throw std::invalid_argument("gamma and eta must be positive");
  if (!(target > 0.0)) throw std::invalid_argument("inner target must be positive");
  require_finite(warm, "inner solver warm start");
}

InnerResult pgm(const ProxLl& P, double eta, double target, Vector theta, int max_iter) {
  const double s = prox_ll_step(P.oracle.constants(), P.gamma);
  const bool same_step = s == eta;
  Best best;
  for (int it = 0;; ++it) {
    Vector next = P.step(theta, s);
    const double r = same_step ? (theta - next).norm() : P.residual(theta, eta);
    if (it > 0 && r <= target) return {std::move(theta), r, it, InnerStatus::Converged};
    best.offer(theta, r);
    if (it >= max_iter) return std::move(best).fail(it);
    theta = std::move(next);
  }
}

InnerResult fista(const ProxLl& P, double eta, double target, Vector theta, int max_iter) {
  const double s = prox_ll_step(P.oracle.constants(), P.gamma);
  Vector z = theta;
  double t = 1.0;
  double obj = P.objective(theta);
  Best best;
  for (int it = 0;; ++it) {
    const double r = P.residual(theta, eta);
    if (it > 0 && r <= target) return {std::move(theta), r, it, InnerStatus::Converged};
    best.offer(theta, r);
    if (it >= max_iter) return std::move(best).fail(it);

    Vector next = P.step(z, s);
    double next_obj = P.objective(next);
    if (next_obj > obj) {
      // function-value restart: drop momentum and take a plain step
      t = 1.0;
      next = P.step(theta, s);
      next_obj = P.objective(next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - theta);
    theta = std::move(next);
    obj = next_obj;
    t = t_next;
  }
}

InnerResult admm(const ProxLl& P, double eta, double target, const Vector& warm, int max_iter) {
  if (!P.oracle.has_smooth_prox()) {
    throw std::invalid_argument("ADMM requires an oracle with an exact smooth prox");
  }
  const double rho = 1.0 / P.gamma;
  const double weight = 1.0 / P.gamma + rho;
  Vector z = warm;
  // scaled dual from the theta-optimality condition at the warm point
  Vector u = -P.grad(warm) / rho;
  Best best;
  for (int it = 0;; ++it) {
    const double r = P.residual(z, eta);
    if (it > 0 && r <= target) return {std::move(z), r, it, InnerStatus::Converged};
    best.offer(z, r);
    if (it >= max_iter) return std::move(best).fail(it);

    const Vector center = (P.y / P.gamma + rho * (z - u)) / weight;
    const Vector theta = *P.oracle.smooth_prox(P.x, center, weight);
    z = P.oracle.prox_lower_nonsmooth(P.x, theta + u, 1.0 / rho);
    u += theta - z;
  }
}

}  // namespace

double prox_ll_objective(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                         double gamma, const Vector& theta) {
  return oracle.lower(x, theta) + (theta - y).squaredNorm() / (2.0 * gamma);
}

double prox_ll_step(const ProblemConstants& c, double gamma) { return 1.0 / (c.L_fy + 1.0 / gamma); }

InnerResult solve_prox_ll(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                          double gamma, double eta, double target, const Vector& warm,
                          InnerMethod method, int max_iter) {
  check_prox_ll_args(gamma, eta, target, warm);
  const ProxLl P{oracle, x, y, gamma};
  Vector start = oracle.project_y(warm);
  switch (method) {
    case InnerMethod::PGM: return pgm(P, eta, target, std::move(start), max_iter);
    case InnerMethod::FISTA: return fista(P, eta, target, std::move(start), max_iter);
    case InnerMethod::ADMM: return admm(P, eta, target, start, max_iter);
  }
  throw std::invalid_argument("unknown inner method");
}

InnerResult prox_ll_single_step(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                                double gamma, double eta, const Vector& warm) {
  if (!(gamma > 0.0) || !(eta > 0.0)) throw std::invalid_argument("gamma and eta must be positive");
  require_finite(warm, "inner solver warm start");
  const ProxLl P{oracle, x, y, gamma};
  Vector theta = P.step(warm, prox_ll_step(oracle.constants(), gamma));
  const double r = P.residual(theta, eta);
  return {std::move(theta), r, 1, InnerStatus::Converged};
}

InnerResult solve_ll(const BilevelOracle& oracle, const Vector& x, double target,
                     const Vector& warm, int max_iter) {
  if (!(target > 0.0)) throw std::invalid_argument("lower-level target must be positive");
  require_finite(warm, "lower-level warm start");
  const double L = oracle.constants().L_fy;
  const double s = L > 0.0 ? 1.0 / L : 1.0;
  auto step = [&](const Vector& v) {
    return oracle.prox_lower_nonsmooth(x, v - s * oracle.lower_smooth_gradient(x, v).y, s);
  };

  Vector y = oracle.project_y(warm);
  Vector z = y;
  double t = 1.0;
  double obj = oracle.lower(x, y);
  Best best;
  for (int it = 0;; ++it) {
    const double r = unit_step_ll_residual(oracle, x, y);
    if (r <= target) return {std::move(y), r, it, InnerStatus::Converged};
    best.offer(y, r);
    if (it >= max_iter) return std::move(best).fail(it);

    Vector next = step(z);
    double next_obj = oracle.lower(x, next);
    if (next_obj > obj) {
      t = 1.0;
      next = step(y);
      next_obj = oracle.lower(x, next);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - y);
    y = std::move(next);
    obj = next_obj;
    t = t_next;
  }
}

}  // namespace agils
