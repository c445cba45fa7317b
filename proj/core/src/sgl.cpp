#include "agils/sgl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "agils/inner.hpp"
#include "agils/rng.hpp"

namespace agils {

namespace {

constexpr int kGroups = 5;

Matrix gaussian_matrix(CounterRng& rng, int rows, int cols) {
  Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) A(i, j) = rng.normal();
  }
  return A;
}

Vector gaussian_vector(CounterRng& rng, int size) {
  Vector v(size);
  for (int i = 0; i < size; ++i) v[i] = rng.normal();
  return v;
}

void check_split(const SglSplit& s, int m, const char* name) {
  if (s.A.cols() != m || s.A.rows() == 0 || s.b.size() != s.A.rows()) {
    throw std::invalid_argument(std::string("sgl split '") + name + "' has inconsistent shape");
  }
}

}  // namespace

double gram_lambda_max(const Matrix& A) {
  const double rows = static_cast<double>(A.rows());
  Vector v = Vector::Ones(A.cols()) / std::sqrt(static_cast<double>(A.cols()));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = A.transpose() * (A * v) / rows;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

Vector sgl_true_coefficients(const GroupStructure& groups) {
  Vector y = Vector::Zero(groups.dimension());
  for (int j = 0; j < groups.count(); ++j) {
    const int value = 2 * (j + 1);
    const int count = std::min(value, groups[j].size);
    y.segment(groups[j].begin, count).setConstant(value);
  }
  return y;
}

SglInstance::SglInstance(SglSplit train, SglSplit validation, SglSplit test, GroupStructure groups,
                         Vector y_true, double sigma)
    : train_(std::move(train)),
      val_(std::move(validation)),
      test_(std::move(test)),
      groups_(std::move(groups)),
      y_true_(std::move(y_true)),
      sigma_(sigma) {
  const int m = groups_.dimension();
  check_split(train_, m, "train");
  check_split(val_, m, "validation");
  check_split(test_, m, "test");
  constants_.L_Fy = gram_lambda_max(val_.A);
  constants_.L_fy = gram_lambda_max(train_.A);
  constants_.rho_g1 = 1.0;
  constants_.rho_g2 = m;
  Atb_tr_ = train_.A.transpose() * train_.b / static_cast<double>(train_.A.rows());
}

AgilsInit SglInstance::default_init() const {
  const Dims d = dims();
  return {Vector::Ones(d.n), Vector::Ones(d.m), Vector::Ones(d.m)};
}

double SglInstance::half_mse(const SglSplit& split, const Vector& y) {
  return (split.A * y - split.b).squaredNorm() / (2.0 * static_cast<double>(split.A.rows()));
}

double SglInstance::eval_upper(const Vector&, const Vector& y) const { return half_mse(val_, y); }

Gradient SglInstance::eval_upper_gradient(const Vector& x, const Vector& y) const {
  return {Vector::Zero(x.size()),
          val_.A.transpose() * (val_.A * y - val_.b) / static_cast<double>(val_.A.rows())};
}

double SglInstance::eval_lower_smooth(const Vector&, const Vector& y) const {
  return half_mse(train_, y);
}

Gradient SglInstance::eval_lower_smooth_gradient(const Vector& x, const Vector& y) const {
  return {Vector::Zero(x.size()),
          train_.A.transpose() * (train_.A * y - train_.b) / static_cast<double>(train_.A.rows())};
}

double SglInstance::eval_lower_nonsmooth(const Vector& x, const Vector& y) const {
  const int J = groups_.count();
  return x.head(J).dot(groups_.block_norms(y)) + x[J] * y.lpNorm<1>();
}

Vector SglInstance::eval_lower_nonsmooth_grad_x(const Vector& x, const Vector& y) const {
  const int J = groups_.count();
  Vector g(x.size());
  g.head(J) = groups_.block_norms(y);
  g[J] = y.lpNorm<1>();
  return g;
}

Vector SglInstance::eval_prox_lower_nonsmooth(const Vector& x, const Vector& v, double step) const {
  const int J = groups_.count();
  return prox_sparse_group_lasso(v, groups_, Vector(step * x.head(J)), step * x[J]);
}

Vector SglInstance::eval_project_x(const Vector& v) const { return project_nonneg(v); }

Vector SglInstance::eval_project_y(const Vector& v) const { return v; }

std::optional<Vector> SglInstance::eval_smooth_prox(const Vector&, const Vector& center,
                                                    double weight) const {
  // (A^T A / n + w I) theta = A^T b / n + w c, through the cached eigenbasis.
  std::call_once(gram_->once, [this] {
    const Matrix gram = train_.A.transpose() * train_.A / static_cast<double>(train_.A.rows());
    gram_->eig = std::make_unique<Eigen::SelfAdjointEigenSolver<Matrix>>(gram);
  });
  const auto& eig = *gram_->eig;
  const Vector rhs = Atb_tr_ + weight * center;
  Vector coeff = eig.eigenvectors().transpose() * rhs;
  coeff.array() /= eig.eigenvalues().array() + weight;
  return Vector(eig.eigenvectors() * coeff);
}

SglInstance make_sgl(std::uint64_t seed, const SglSizes& sizes) {
  if (sizes.n_tr <= 0 || sizes.n_val <= 0 || sizes.n_test <= 0 || sizes.m <= 0) {
    throw std::invalid_argument("sgl sizes must be positive");
  }
  if (sizes.m % kGroups != 0) throw std::invalid_argument("sgl dimension m must be divisible by 5");
  if (!(sizes.snr > 0.0)) throw std::invalid_argument("sgl snr must be positive");

  GroupStructure groups = GroupStructure::equal(sizes.m, kGroups);
  Vector y_true = sgl_true_coefficients(groups);

  CounterRng rng(seed);
  SglSplit train{gaussian_matrix(rng, sizes.n_tr, sizes.m), Vector()};
  SglSplit val{gaussian_matrix(rng, sizes.n_val, sizes.m), Vector()};
  SglSplit test{gaussian_matrix(rng, sizes.n_test, sizes.m), Vector()};
  const Vector eps_tr = gaussian_vector(rng, sizes.n_tr);
  const Vector eps_val = gaussian_vector(rng, sizes.n_val);
  const Vector eps_test = gaussian_vector(rng, sizes.n_test);

  const Vector signal_tr = train.A * y_true;
  const double sigma = signal_tr.norm() / (sizes.snr * eps_tr.norm());
  train.b = signal_tr + sigma * eps_tr;
  val.b = val.A * y_true + sigma * eps_val;
  test.b = test.A * y_true + sigma * eps_test;

  return SglInstance(std::move(train), std::move(val), std::move(test), std::move(groups),
                     std::move(y_true), sigma);
}

SglMetrics sgl_metrics(const SglInstance& inst, const Vector& x, const Vector& y_iter, double gamma,
                       const SglMetricOptions& options) {
  if ((x.array() < 0.0).any()) throw std::invalid_argument("sgl_metrics: x must be nonnegative");
  const int max_iter =
      options.ll_max_iter > 0 ? options.ll_max_iter : 100 * default_inner_max_iter(inst.m());
  const InnerResult ll = solve_ll(inst, x, options.ll_target, y_iter, max_iter);

  SglMetrics out;
  out.ll_converged = ll.converged();
  out.val_err = SglInstance::half_mse(inst.validation(), ll.theta);
  out.test_err = SglInstance::half_mse(inst.test(), ll.theta);
  out.test_err_infeasible = SglInstance::half_mse(inst.test(), y_iter);

  EnvelopeOptions env;
  env.target = options.envelope_target;
  env.max_iter = max_iter;
  const MoreauEnvelope v = moreau_envelope(inst, x, y_iter, gamma, env);
  if (!v.solve.converged()) out.ll_converged = false;
  out.feasibility = (inst.lower(x, y_iter) - v.value) / static_cast<double>(inst.validation().A.rows());
  return out;
}

AgilsConfig sgl_default_config(int m) {
  AgilsConfig cfg;
  cfg.epsilon = 1e-6;
  cfg.c_ytilde = 50.0 * std::sqrt(static_cast<double>(m));
  cfg.p0 = 6.0;
  cfg.rho_p = 0.01;
  cfg.c_p = 1.0;
  cfg.c_y = 1e4;
  cfg.c_alpha = 0.1;
  cfg.c_beta = 0.1;
  cfg.s0 = 5.0;
  cfg.p_s = 1.05;
  cfg.tau0 = 10.0;
  cfg.p_tau = 0.2;
  cfg.stop_rule = StopRule::RelChangeAndT;
  cfg.rel_tol = 0.005 / m;
  cfg.t_tol = 0.1;
  cfg.max_outer = 20000;
  return cfg;
}

}  // namespace agils
