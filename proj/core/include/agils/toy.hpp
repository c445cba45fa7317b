#pragma once

#include "agils/problem.hpp"
#include "agils/solver.hpp"

namespace agils {

/// Toy bilevel problem on X = [0,1]^n, Y = R^n:
///
///   min sum_i y_i  s.t.  y in argmin_y sum_i sqrt((y_i - a_i)^2 + 1/n^2) + sum_i x_i |y_i|
///
/// with a_i = -2/n^(2/3) on the first half and +2/n^(2/3) on the second.
/// The solution set is x_i = 0, y_i = a_i (first half) and
/// x_i in [a_i/sqrt(a_i^2 + 1/n^2), 1], y_i = 0 (second half).
class ToyInstance final : public BilevelOracle {
 public:
  explicit ToyInstance(int n);

  int n() const { return n_; }
  const Vector& a() const { return a_; }

  Dims dims() const override { return {n_, n_}; }
  ProblemConstants constants() const override;
  bool has_smooth_prox() const override { return true; }
  /// sum of a_i over the first half: the optimal upper value.
  double upper_lower_bound() const override;

  /// Lower end of the admissible x_i interval for i in the second half.
  double x_lower_endpoint(int i) const;

  /// x0 = 0, y0 = theta0 = a.
  AgilsInit default_init() const;

 protected:
  double eval_upper(const Vector& x, const Vector& y) const override;
  Gradient eval_upper_gradient(const Vector& x, const Vector& y) const override;
  double eval_lower_smooth(const Vector& x, const Vector& y) const override;
  Gradient eval_lower_smooth_gradient(const Vector& x, const Vector& y) const override;
  double eval_lower_nonsmooth(const Vector& x, const Vector& y) const override;
  Vector eval_lower_nonsmooth_grad_x(const Vector& x, const Vector& y) const override;
  Vector eval_prox_lower_nonsmooth(const Vector& x, const Vector& v, double step) const override;
  Vector eval_project_x(const Vector& v) const override;
  Vector eval_project_y(const Vector& v) const override;
  std::optional<Vector> eval_smooth_prox(const Vector& x, const Vector& center,
                                         double weight) const override;

 private:
  int n_;
  double delta_;  // 1/n^2
  Vector a_;
};

/// Throws std::invalid_argument unless n >= 2 and n is even.
ToyInstance make_toy(int n);

/// dist((x, y), S*) / sqrt(1 + min_{z in S*} |z|^2).
double toy_error(const ToyInstance& inst, const Vector& x, const Vector& y);

/// Default AGILS parameters for the toy problem: epsilon = 1e-6,
/// c_ytilde = 50 sqrt(n), p0 = 0.5, rho_p = 0.02, c_p = 1,
/// s_k = 0.05/(k+1)^1.05, tau_k = 20/(k+1)^0.7, c_alpha = c_beta = 0.1,
/// stop once the toy error falls below 1/n.
AgilsConfig toy_default_config(int n);

}  // namespace agils
