#pragma once

#include "agils/inner.hpp"
#include "agils/problem.hpp"

namespace agils {

/// Moreau envelope of the lower-level objective,
///
///   v_gamma(x, y) = min_{theta in Y} phi(x, theta) + |theta - y|^2 / (2 gamma),
///
/// evaluated through a tight inner solve, together with its gradient
/// (grad_x f(x,theta*) + grad_x g(x,theta*), (y - theta*)/gamma).
struct MoreauEnvelope {
  double value = 0.0;
  Gradient gradient;
  InnerResult solve;
};

struct EnvelopeOptions {
  double target = 1e-10;
  InnerMethod method = InnerMethod::PGM;
  int max_iter = 0;  // 0 selects default_inner_max_iter(m) * 10
};

/// `warm` defaults to y when empty. The prox-gradient residual uses
/// eta = 1/(L_fy + 1/gamma).
MoreauEnvelope moreau_envelope(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                               double gamma, const EnvelopeOptions& options = {},
                               const Vector& warm = Vector());

/// phi(x, y) - v_gamma(x, y), the value-function constraint gap (>= 0).
double envelope_gap(const BilevelOracle& oracle, const Vector& x, const Vector& y, double gamma,
                    const EnvelopeOptions& options = {}, const Vector& warm = Vector());

}  // namespace agils
