#include "agils/prox.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace agils {

GroupStructure::GroupStructure(std::vector<Range> ranges, int m) : ranges_(std::move(ranges)), m_(m) {
  if (m <= 0) throw std::invalid_argument("group structure dimension must be positive");
  int next = 0;
  for (const Range& r : ranges_) {
    if (r.begin != next || r.size <= 0) {
      throw std::invalid_argument("groups must be contiguous, nonempty and ordered");
    }
    next += r.size;
  }
  if (next != m) throw std::invalid_argument("groups must cover exactly {0..m-1}");
}

GroupStructure GroupStructure::equal(int m, int count) {
  if (count <= 0 || m <= 0 || m % count != 0) {
    throw std::invalid_argument("dimension must be divisible by the number of groups");
  }
  const int size = m / count;
  std::vector<Range> ranges;
  ranges.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) ranges.push_back({j * size, size});
  return GroupStructure(std::move(ranges), m);
}

Vector GroupStructure::block_norms(const Vector& v) const {
  if (v.size() != m_) throw std::invalid_argument("vector length does not match group structure");
  Vector norms(count());
  for (int j = 0; j < count(); ++j) {
    norms[j] = v.segment(ranges_[j].begin, ranges_[j].size).norm();
  }
  return norms;
}

Vector soft_threshold(const Vector& v, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("soft-threshold level must be nonnegative");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - lambda;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

Vector soft_threshold(const Vector& v, const Vector& lambda) {
  if (lambda.size() != v.size()) throw std::invalid_argument("threshold vector length mismatch");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(lambda[i] >= 0.0)) throw std::invalid_argument("soft-threshold level must be nonnegative");
    const double mag = std::abs(v[i]) - lambda[i];
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

Vector group_shrink(const Vector& v, const GroupStructure& groups, const Vector& weights) {
  if (weights.size() != groups.count()) {
    throw std::invalid_argument("group weight count does not match group structure");
  }
  if (v.size() != groups.dimension()) {
    throw std::invalid_argument("vector length does not match group structure");
  }
  Vector out = v;
  for (int j = 0; j < groups.count(); ++j) {
    if (!(weights[j] >= 0.0)) throw std::invalid_argument("group weights must be nonnegative");
    auto block = out.segment(groups[j].begin, groups[j].size);
    const double norm = block.norm();
    if (norm <= weights[j]) {
      block.setZero();  // also covers norm == 0
    } else {
      block *= 1.0 - weights[j] / norm;
    }
  }
  return out;
}

Vector prox_sparse_group_lasso(const Vector& v, const GroupStructure& groups,
                               const Vector& group_w, double l1_w) {
  return group_shrink(soft_threshold(v, l1_w), groups, group_w);
}

Vector project_box(const Vector& v, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("box bounds must satisfy lo <= hi");
  return v.cwiseMax(lo).cwiseMin(hi);
}

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

double prox_grad_residual(const BilevelOracle& oracle, const Vector& x, const Vector& theta,
                          const Vector& y, double gamma, double eta) {
  if (!(gamma > 0.0) || !(eta > 0.0)) throw std::invalid_argument("gamma and eta must be positive");
  const Vector grad = oracle.lower_smooth_gradient(x, theta).y + (theta - y) / gamma;
  const Vector next = oracle.prox_lower_nonsmooth(x, theta - eta * grad, eta);
  return (theta - next).norm();
}

double unit_step_ll_residual(const BilevelOracle& oracle, const Vector& x, const Vector& y) {
  const Vector grad = oracle.lower_smooth_gradient(x, y).y;
  const Vector next = oracle.prox_lower_nonsmooth(x, y - grad, 1.0);
  return (y - next).norm();
}

}  // namespace agils
