#include "agils/problem.hpp"

#include <cmath>
#include <string>

namespace agils {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw NonFiniteError(std::string("non-finite value returned by ") + what);
  }
}

double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NonFiniteError(std::string("non-finite value returned by ") + what);
  }
  return v;
}

void ProblemConstants::validate() const {
  const double all[] = {L_Fx, L_Fy, L_fx, L_fy, L_g1, L_g2, rho_f1, rho_f2, rho_g1, rho_g2};
  for (double c : all) {
    if (!std::isfinite(c) || c < 0.0) {
      throw std::invalid_argument("problem constants must be finite and nonnegative");
    }
  }
}

double BilevelOracle::upper(const Vector& x, const Vector& y) const {
  return require_finite(eval_upper(x, y), "upper objective");
}

Gradient BilevelOracle::upper_gradient(const Vector& x, const Vector& y) const {
  Gradient g = eval_upper_gradient(x, y);
  require_finite(g.x, "upper gradient (x)");
  require_finite(g.y, "upper gradient (y)");
  return g;
}

double BilevelOracle::lower_smooth(const Vector& x, const Vector& y) const {
  return require_finite(eval_lower_smooth(x, y), "lower smooth objective");
}

Gradient BilevelOracle::lower_smooth_gradient(const Vector& x, const Vector& y) const {
  Gradient g = eval_lower_smooth_gradient(x, y);
  require_finite(g.x, "lower smooth gradient (x)");
  require_finite(g.y, "lower smooth gradient (y)");
  return g;
}

double BilevelOracle::lower_nonsmooth(const Vector& x, const Vector& y) const {
  return require_finite(eval_lower_nonsmooth(x, y), "lower nonsmooth objective");
}

Vector BilevelOracle::lower_nonsmooth_grad_x(const Vector& x, const Vector& y) const {
  Vector g = eval_lower_nonsmooth_grad_x(x, y);
  require_finite(g, "lower nonsmooth x-gradient");
  return g;
}

Vector BilevelOracle::prox_lower_nonsmooth(const Vector& x, const Vector& v, double step) const {
  if (!(step > 0.0)) throw std::invalid_argument("prox step must be positive");
  require_finite(v, "prox argument");
  Vector out = eval_prox_lower_nonsmooth(x, v, step);
  require_finite(out, "lower nonsmooth prox");
  return out;
}

Vector BilevelOracle::project_x(const Vector& v) const {
  Vector out = eval_project_x(v);
  require_finite(out, "projection onto X");
  return out;
}

Vector BilevelOracle::project_y(const Vector& v) const {
  Vector out = eval_project_y(v);
  require_finite(out, "projection onto Y");
  return out;
}

std::optional<Vector> BilevelOracle::smooth_prox(const Vector& x, const Vector& center,
                                                 double weight) const {
  if (!(weight > 0.0)) throw std::invalid_argument("smooth prox weight must be positive");
  auto out = eval_smooth_prox(x, center, weight);
  if (out) require_finite(*out, "smooth prox");
  return out;
}

Smoothness effective_smoothness(const ProblemConstants& c, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("penalty parameter p must be positive");
  return {c.L_Fx / p + c.L_fx + c.L_g1 + c.rho_f1 + c.rho_g1, c.L_Fy / p + c.L_fy};
}

StepSizes default_stepsizes(const ProblemConstants& c, double p, double c_alpha, double c_beta) {
  if (!(c_alpha > 0.0) || !(c_beta > 0.0)) {
    throw std::invalid_argument("c_alpha and c_beta must be positive");
  }
  const Smoothness L = effective_smoothness(c, p);
  return {1.0 / (L.x + c_alpha), 1.0 / (L.y + c_beta)};
}

double default_gamma(const ProblemConstants& c) {
  const double rho = c.rho_f2 + c.rho_g2;
  if (!(rho > 0.0)) {
    throw std::invalid_argument("rho_f2 + rho_g2 is zero: gamma must be user-supplied");
  }
  return 1.0 / rho;
}

bool gamma_admissible(const ProblemConstants& c, double gamma, bool strict) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) return false;
  const double rho = c.rho_f2 + c.rho_g2;
  if (rho == 0.0) return true;
  return strict ? gamma * rho < 1.0 : gamma <= 1.0 / rho;
}

}  // namespace agils
