#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace agils {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an oracle returns (or is handed) a NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Smoothness and weak-convexity moduli of a bilevel problem.
///
/// `L_*` are Lipschitz moduli of the partial gradients of the upper objective
/// F and the smooth lower part f; `L_g1`/`L_g2` bound the x-gradient of the
/// nonsmooth lower part g in x and in y. `rho_*` are weak-convexity moduli
/// (h + rho1/2 |x|^2 + rho2/2 |y|^2 jointly convex).
struct ProblemConstants {
  double L_Fx = 0.0;
  double L_Fy = 0.0;
  double L_fx = 0.0;
  double L_fy = 0.0;
  double L_g1 = 0.0;
  double L_g2 = 0.0;
  double rho_f1 = 0.0;
  double rho_f2 = 0.0;
  double rho_g1 = 0.0;
  double rho_g2 = 0.0;

  /// Throws std::invalid_argument if any constant is negative or non-finite.
  void validate() const;
};

struct Dims {
  int n = 0;  // upper-level variable x
  int m = 0;  // lower-level variable y
};

/// Both partial gradients of a scalar function of (x, y).
struct Gradient {
  Vector x;
  Vector y;
};

/// Callable surface of a bilevel problem
///
///   min_{x in X, y in Y} F(x, y)   s.t.  y in argmin_{y in Y} f(x, y) + g(x, y)
///
/// with f smooth and g convex in y with a cheap proximal map. Implementations
/// override the protected `eval_*` hooks; the public entry points check every
/// returned value for NaN/Inf and throw NonFiniteError.
///
/// Oracles are immutable after construction and may be shared read-only
/// between concurrent runs.
class BilevelOracle {
 public:
  virtual ~BilevelOracle() = default;

  virtual Dims dims() const = 0;
  virtual ProblemConstants constants() const = 0;

  double upper(const Vector& x, const Vector& y) const;
  Gradient upper_gradient(const Vector& x, const Vector& y) const;

  double lower_smooth(const Vector& x, const Vector& y) const;
  Gradient lower_smooth_gradient(const Vector& x, const Vector& y) const;

  double lower_nonsmooth(const Vector& x, const Vector& y) const;
  Vector lower_nonsmooth_grad_x(const Vector& x, const Vector& y) const;

  /// Prox_{step * g~(x, .)}(v) where g~ = g + indicator of Y.
  Vector prox_lower_nonsmooth(const Vector& x, const Vector& v, double step) const;

  Vector project_x(const Vector& v) const;
  Vector project_y(const Vector& v) const;

  /// phi(x, y) = f(x, y) + g(x, y).
  double lower(const Vector& x, const Vector& y) const {
    return lower_smooth(x, y) + lower_nonsmooth(x, y);
  }

  /// argmin_theta f(x, theta) + weight/2 |theta - center|^2, when the oracle
  /// can compute it exactly. Used by the ADMM inner solver; returns nullopt
  /// if unsupported.
  std::optional<Vector> smooth_prox(const Vector& x, const Vector& center, double weight) const;
  virtual bool has_smooth_prox() const { return false; }

  /// A lower bound of F on the feasible set; only used for monitoring.
  virtual double upper_lower_bound() const { return 0.0; }

 protected:
  virtual double eval_upper(const Vector& x, const Vector& y) const = 0;
  virtual Gradient eval_upper_gradient(const Vector& x, const Vector& y) const = 0;
  virtual double eval_lower_smooth(const Vector& x, const Vector& y) const = 0;
  virtual Gradient eval_lower_smooth_gradient(const Vector& x, const Vector& y) const = 0;
  virtual double eval_lower_nonsmooth(const Vector& x, const Vector& y) const = 0;
  virtual Vector eval_lower_nonsmooth_grad_x(const Vector& x, const Vector& y) const = 0;
  virtual Vector eval_prox_lower_nonsmooth(const Vector& x, const Vector& v, double step) const = 0;
  virtual Vector eval_project_x(const Vector& v) const = 0;
  virtual Vector eval_project_y(const Vector& v) const = 0;
  virtual std::optional<Vector> eval_smooth_prox(const Vector& /*x*/, const Vector& /*center*/,
                                                 double /*weight*/) const {
    return std::nullopt;
  }
};

/// Throws NonFiniteError naming `what` if `v` holds a NaN or Inf.
void require_finite(const Vector& v, const char* what);
double require_finite(double v, const char* what);

struct Smoothness {
  double x = 0.0;  // Lipschitz modulus of the x-part of the penalized objective
  double y = 0.0;  // same for the y-part
};

/// Moduli of the penalized working objective at penalty p:
///   x: L_Fx/p + L_fx + L_g1 + rho_f1 + rho_g1,  y: L_Fy/p + L_fy.
Smoothness effective_smoothness(const ProblemConstants& c, double p);

struct StepSizes {
  double alpha = 0.0;  // x step
  double beta = 0.0;   // y step
};

/// alpha = 1/(L_x + c_alpha), beta = 1/(L_y + c_beta).
StepSizes default_stepsizes(const ProblemConstants& c, double p, double c_alpha, double c_beta);

/// gamma = 1/(rho_f2 + rho_g2). Throws if the sum is zero, in which case
/// gamma must be supplied by the caller.
double default_gamma(const ProblemConstants& c);

/// Whether gamma is admissible for the proximal reformulation:
/// 0 < gamma <= 1/(rho_f2 + rho_g2), or strictly less in strict mode.
bool gamma_admissible(const ProblemConstants& c, double gamma, bool strict = false);

}  // namespace agils
