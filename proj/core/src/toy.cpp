#include "agils/toy.hpp"

#include <cmath>
#include <stdexcept>

#include "agils/prox.hpp"

namespace agils {

ToyInstance::ToyInstance(int n) : n_(n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("toy dimension must be even and at least 2");
  delta_ = 1.0 / (static_cast<double>(n) * n);
  const double level = 2.0 / std::pow(static_cast<double>(n), 2.0 / 3.0);
  a_.resize(n);
  for (int i = 0; i < n; ++i) a_[i] = i < n / 2 ? -level : level;
}

ProblemConstants ToyInstance::constants() const {
  ProblemConstants c;
  c.L_fy = n_;
  c.rho_g1 = 1.0;
  c.rho_g2 = 1.0;
  return c;
}

double ToyInstance::upper_lower_bound() const { return a_.head(n_ / 2).sum(); }

double ToyInstance::x_lower_endpoint(int i) const {
  return a_[i] / std::sqrt(a_[i] * a_[i] + delta_);
}

AgilsInit ToyInstance::default_init() const { return {Vector::Zero(n_), a_, a_}; }

double ToyInstance::eval_upper(const Vector&, const Vector& y) const { return y.sum(); }

Gradient ToyInstance::eval_upper_gradient(const Vector& x, const Vector& y) const {
  return {Vector::Zero(x.size()), Vector::Ones(y.size())};
}

double ToyInstance::eval_lower_smooth(const Vector&, const Vector& y) const {
  return ((y - a_).array().square() + delta_).sqrt().sum();
}

Gradient ToyInstance::eval_lower_smooth_gradient(const Vector& x, const Vector& y) const {
  const Eigen::ArrayXd r = (y - a_).array();
  return {Vector::Zero(x.size()), (r / (r.square() + delta_).sqrt()).matrix()};
}

double ToyInstance::eval_lower_nonsmooth(const Vector& x, const Vector& y) const {
  return x.dot(y.cwiseAbs());
}

Vector ToyInstance::eval_lower_nonsmooth_grad_x(const Vector&, const Vector& y) const {
  return y.cwiseAbs();
}

Vector ToyInstance::eval_prox_lower_nonsmooth(const Vector& x, const Vector& v, double step) const {
  return soft_threshold(v, Vector(step * x));
}

Vector ToyInstance::eval_project_x(const Vector& v) const { return project_box(v, 0.0, 1.0); }

Vector ToyInstance::eval_project_y(const Vector& v) const { return v; }

std::optional<Vector> ToyInstance::eval_smooth_prox(const Vector&, const Vector& center,
                                                    double weight) const {
  // Separable: theta_i solves (theta - a)/sqrt((theta - a)^2 + delta) + w (theta - c) = 0,
  // whose root lies in [c - 1/w, c + 1/w]. Safeguarded Newton.
  Vector out(n_);
  for (int i = 0; i < n_; ++i) {
    const double c = center[i];
    double lo = c - 1.0 / weight;
    double hi = c + 1.0 / weight;
    double th = c;
    for (int it = 0; it < 100; ++it) {
      const double r = th - a_[i];
      const double s = std::sqrt(r * r + delta_);
      const double d1 = r / s + weight * (th - c);
      if (d1 == 0.0) break;
      if (d1 > 0.0) hi = th; else lo = th;
      const double d2 = delta_ / (s * s * s) + weight;
      double next = th - d1 / d2;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - th) <= 1e-16 * (1.0 + std::abs(th))) {
        th = next;
        break;
      }
      th = next;
    }
    out[i] = th;
  }
  return out;
}

ToyInstance make_toy(int n) { return ToyInstance(n); }

double toy_error(const ToyInstance& inst, const Vector& x, const Vector& y) {
  const int n = inst.n();
  if (x.size() != n || y.size() != n) throw std::invalid_argument("toy_error: dimension mismatch");
  const Vector& a = inst.a();
  double dist2 = 0.0;
  double norm2 = 0.0;
  for (int i = 0; i < n / 2; ++i) {
    dist2 += x[i] * x[i] + (y[i] - a[i]) * (y[i] - a[i]);
    norm2 += a[i] * a[i];
  }
  for (int i = n / 2; i < n; ++i) {
    const double lo = inst.x_lower_endpoint(i);
    const double dx = x[i] < lo ? lo - x[i] : (x[i] > 1.0 ? x[i] - 1.0 : 0.0);
    dist2 += dx * dx + y[i] * y[i];
    norm2 += lo * lo;
  }
  return std::sqrt(dist2) / std::sqrt(1.0 + norm2);
}

AgilsConfig toy_default_config(int n) {
  AgilsConfig cfg;
  cfg.epsilon = 1e-6;
  cfg.c_ytilde = 50.0 * std::sqrt(static_cast<double>(n));
  cfg.p0 = 0.5;
  cfg.rho_p = 0.02;
  cfg.c_p = 1.0;
  cfg.c_y = 1.0;
  cfg.c_alpha = 0.1;
  cfg.c_beta = 0.1;
  cfg.s0 = 0.05;
  cfg.p_s = 1.05;
  cfg.tau0 = 20.0;
  cfg.p_tau = 0.7;
  cfg.stop_rule = StopRule::MetricBelow;
  cfg.metric_tol = 1.0 / n;
  cfg.max_outer = 20000;
  return cfg;
}

}  // namespace agils
