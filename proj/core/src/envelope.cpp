#include "agils/envelope.hpp"

#include <utility>

namespace agils {

MoreauEnvelope moreau_envelope(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                               double gamma, const EnvelopeOptions& options, const Vector& warm) {
  const double eta = prox_ll_step(oracle.constants(), gamma);
  const int max_iter =
      options.max_iter > 0 ? options.max_iter : 10 * default_inner_max_iter(oracle.dims().m);
  InnerResult solve = solve_prox_ll(oracle, x, y, gamma, eta, options.target,
                                    warm.size() == 0 ? y : warm, options.method, max_iter);
  const Vector& theta = solve.theta;

  MoreauEnvelope env;
  env.value = prox_ll_objective(oracle, x, y, gamma, theta);
  env.gradient.x = oracle.lower_smooth_gradient(x, theta).x + oracle.lower_nonsmooth_grad_x(x, theta);
  env.gradient.y = (y - theta) / gamma;
  env.solve = std::move(solve);
  return env;
}

double envelope_gap(const BilevelOracle& oracle, const Vector& x, const Vector& y, double gamma,
                    const EnvelopeOptions& options, const Vector& warm) {
  return oracle.lower(x, y) - moreau_envelope(oracle, x, y, gamma, options, warm).value;
}

}  // namespace agils
