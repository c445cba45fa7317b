#pragma once

#include <cstddef>
#include <vector>

#include "agils/problem.hpp"

namespace agils {

/// Ordered partition of {0, ..., m-1} into contiguous, nonempty blocks.
class GroupStructure {
 public:
  struct Range {
    int begin = 0;
    int size = 0;
  };

  /// Validates that the ranges are contiguous, disjoint and cover {0..m-1}.
  GroupStructure(std::vector<Range> ranges, int m);

  /// `count` equal blocks covering {0..m-1}; m must be divisible by count.
  static GroupStructure equal(int m, int count);

  int dimension() const { return m_; }
  int count() const { return static_cast<int>(ranges_.size()); }
  const Range& operator[](std::size_t j) const { return ranges_[j]; }
  const std::vector<Range>& ranges() const { return ranges_; }

  /// Euclidean norm of every block of v.
  Vector block_norms(const Vector& v) const;

 private:
  std::vector<Range> ranges_;
  int m_ = 0;
};

/// sign(v_i) * max(|v_i| - lambda, 0).
Vector soft_threshold(const Vector& v, double lambda);

/// Per-coordinate thresholds, used for weighted l1 terms.
Vector soft_threshold(const Vector& v, const Vector& lambda);

/// Prox of sum_j w_j |v^(j)|_2: blocks with norm <= w_j vanish, others are
/// scaled by 1 - w_j/|v^(j)|.
Vector group_shrink(const Vector& v, const GroupStructure& groups, const Vector& weights);

/// Prox of sum_j w_j |y^(j)|_2 + l1_w |y|_1, computed as group shrinkage of
/// the soft-thresholded input.
Vector prox_sparse_group_lasso(const Vector& v, const GroupStructure& groups,
                               const Vector& group_w, double l1_w);

Vector project_box(const Vector& v, double lo, double hi);
Vector project_nonneg(const Vector& v);

/// Prox-gradient residual of the proximal lower-level problem
///
///   G(theta, x, y) = | theta - Prox_{eta g~(x,.)}(theta - eta (grad_y f(x, theta) + (theta - y)/gamma)) |
///
/// It vanishes exactly at theta = theta*_gamma(x, y) and is the stopping
/// contract of every inexact inner solve.
double prox_grad_residual(const BilevelOracle& oracle, const Vector& x, const Vector& theta,
                          const Vector& y, double gamma, double eta);

/// |y - Prox_{g~(x,.)}(y - grad_y f(x, y))|, the unit-step stationarity
/// residual of the plain lower-level problem.
double unit_step_ll_residual(const BilevelOracle& oracle, const Vector& x, const Vector& y);

}  // namespace agils
