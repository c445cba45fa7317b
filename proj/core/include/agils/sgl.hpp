#pragma once

#include <cstdint>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "agils/envelope.hpp"
#include "agils/problem.hpp"
#include "agils/prox.hpp"
#include "agils/solver.hpp"

namespace agils {

struct SglSizes {
  int n_tr = 200;
  int n_val = 200;
  int n_test = 200;
  int m = 300;
  double snr = 3.0;
};

/// One train/validation/test split of a regression dataset.
struct SglSplit {
  Matrix A;
  Vector b;
};

/// Sparse group Lasso hyperparameter selection as a bilevel problem:
///
///   min_{x >= 0, y}  |A_val y - b_val|^2 / (2 n_val)
///   s.t. y in argmin  |A_tr y - b_tr|^2 / (2 n_tr) + sum_j x_j |y^(j)|_2 + x_{J+1} |y|_1
///
/// x has J+1 entries (J group weights, then the l1 weight).
class SglInstance final : public BilevelOracle {
 public:
  SglInstance(SglSplit train, SglSplit validation, SglSplit test, GroupStructure groups,
              Vector y_true, double sigma);

  const SglSplit& train() const { return train_; }
  const SglSplit& validation() const { return val_; }
  const SglSplit& test() const { return test_; }
  const GroupStructure& groups() const { return groups_; }
  const Vector& y_true() const { return y_true_; }
  double sigma() const { return sigma_; }
  int m() const { return groups_.dimension(); }

  Dims dims() const override { return {groups_.count() + 1, groups_.dimension()}; }
  ProblemConstants constants() const override { return constants_; }
  bool has_smooth_prox() const override { return true; }

  /// x0 = 1, y0 = theta0 = 1.
  AgilsInit default_init() const;

  /// sum_i (b_i - a_i^T y)^2 / (2 |I|) on a split.
  static double half_mse(const SglSplit& split, const Vector& y);

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
  SglSplit train_;
  SglSplit val_;
  SglSplit test_;
  GroupStructure groups_;
  Vector y_true_;
  double sigma_;
  ProblemConstants constants_;
  Vector Atb_tr_;  // A_tr^T b_tr / n_tr

  // Eigendecomposition of A_tr^T A_tr / n_tr, built on first smooth_prox call
  // and shared between copies.
  struct GramCache {
    std::once_flag once;
    std::unique_ptr<Eigen::SelfAdjointEigenSolver<Matrix>> eig;
  };
  std::shared_ptr<GramCache> gram_ = std::make_shared<GramCache>();
};

/// Largest eigenvalue of A^T A / rows by power iteration (200 iterations,
/// relative tolerance 1e-10).
double gram_lambda_max(const Matrix& A);

/// Ground-truth coefficients: group i (1-based) has its first 2i entries equal
/// to 2i (clamped to the group size), the rest zero.
Vector sgl_true_coefficients(const GroupStructure& groups);

/// Synthetic dataset: standard normal rows, noise sigma*eps with sigma chosen
/// so that |A_tr y| / |b_tr - A_tr y| = snr exactly; validation and test
/// splits share the same sigma. Deterministic in `seed`.
/// Throws unless m is divisible by 5 and all sizes are positive.
SglInstance make_sgl(std::uint64_t seed, const SglSizes& sizes = {});

struct SglMetrics {
  double val_err = 0.0;
  double test_err = 0.0;
  double test_err_infeasible = 0.0;
  double feasibility = 0.0;
  bool ll_converged = true;
};

struct SglMetricOptions {
  double ll_target = 1e-8;
  double envelope_target = 1e-10;
  int ll_max_iter = 0;  // 0 selects 100 * default_inner_max_iter(m)
};

/// Post-processing metrics at hyperparameter x and lower-level iterate y_iter.
/// val_err/test_err are evaluated at y_hat = solve_ll(x) warm-started at
/// y_iter; test_err_infeasible at y_iter; feasibility is
/// (phi(x, y_iter) - v_gamma(x, y_iter)) / n_val.
SglMetrics sgl_metrics(const SglInstance& inst, const Vector& x, const Vector& y_iter, double gamma,
                       const SglMetricOptions& options = {});

/// Default AGILS parameters for sparse group Lasso: toy defaults except
/// p0 = 6, rho_p = 0.01, s_k = 5/(k+1)^1.05, tau_k = 10/(k+1)^0.2,
/// c_ytilde = 50 sqrt(m), c_y = 1e4, stop on relative change < 0.005/m and t < 0.1.
AgilsConfig sgl_default_config(int m);

}  // namespace agils
