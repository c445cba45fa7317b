#include "agils/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "agils/prox.hpp"

namespace agils {

namespace {

constexpr double kRelativeTargetFloor = 1e-14;

std::string lower_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("agils config: ") + field + " " + what);
}

}  // namespace

std::string_view to_string(InexactnessVariant v) {
  switch (v) {
    case InexactnessVariant::Both: return "Both";
    case InexactnessVariant::AbsoluteOnly: return "AbsoluteOnly";
    case InexactnessVariant::RelativeOnly: return "RelativeOnly";
    case InexactnessVariant::NearExact: return "NearExact";
    case InexactnessVariant::SingleStep: return "SingleStep";
  }
  return "?";
}

std::string_view to_string(StopRule r) {
  switch (r) {
    case StopRule::MaxResidual: return "MaxResidual";
    case StopRule::RelChangeAndT: return "RelChangeAndT";
    case StopRule::MetricBelow: return "MetricBelow";
  }
  return "?";
}

std::string_view to_string(CaseTaken c) {
  switch (c) {
    case CaseTaken::Case1: return "Case1";
    case CaseTaken::Case2: return "Case2";
    case CaseTaken::Case3Accepted: return "Case3Accepted";
    case CaseTaken::Case3Rejected: return "Case3Rejected";
  }
  return "?";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxOuterExceeded: return "MaxOuterExceeded";
  }
  return "?";
}

InexactnessVariant parse_variant(std::string_view name) {
  const std::string s = lower_case(name);
  if (s == "both" || s == "agils") return InexactnessVariant::Both;
  if (s == "absoluteonly" || s == "absolute" || s == "agils_a") return InexactnessVariant::AbsoluteOnly;
  if (s == "relativeonly" || s == "relative" || s == "agils_r") return InexactnessVariant::RelativeOnly;
  if (s == "nearexact" || s == "agils-e") return InexactnessVariant::NearExact;
  if (s == "singlestep" || s == "agils-s") return InexactnessVariant::SingleStep;
  throw std::invalid_argument("unknown inexactness variant '" + std::string(name) + "'");
}

StopRule parse_stop_rule(std::string_view name) {
  const std::string s = lower_case(name);
  if (s == "maxresidual") return StopRule::MaxResidual;
  if (s == "relchangeandt") return StopRule::RelChangeAndT;
  if (s == "metricbelow") return StopRule::MetricBelow;
  throw std::invalid_argument("unknown stop rule '" + std::string(name) + "'");
}

CaseTaken parse_case(std::string_view name) {
  for (CaseTaken c : {CaseTaken::Case1, CaseTaken::Case2, CaseTaken::Case3Accepted,
                      CaseTaken::Case3Rejected}) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown case '" + std::string(name) + "'");
}

double AgilsConfig::s(int k) const { return s0 / std::pow(k + 1.0, p_s); }

double AgilsConfig::tau(int k) const { return tau0 / std::pow(k + 1.0, p_tau); }

AgilsConfig AgilsConfig::resolved(const ProblemConstants& c, const Dims& dims) const {
  c.validate();
  AgilsConfig out = *this;
  if (!out.gamma) out.gamma = default_gamma(c);
  require(gamma_admissible(c, *out.gamma, strict_gamma), "gamma",
          strict_gamma ? "must lie in (0, 1/(rho_f2 + rho_g2))" : "must lie in (0, 1/(rho_f2 + rho_g2)]");
  if (!out.eta) out.eta = 1.0 / (c.L_fy + 1.0 / *out.gamma);
  require(*out.eta > 0.0 && std::isfinite(*out.eta), "eta", "must be positive");

  require(epsilon >= 0.0, "epsilon", "must be nonnegative");
  require(p0 > 0.0, "p0", "must be positive");
  require(rho_p > 0.0, "rho_p", "must be positive");
  require(c_p > 0.0, "c_p", "must be positive");
  require(c_y > 0.0, "c_y", "must be positive");
  require(c_ytilde > 0.0, "c_ytilde", "must be positive");
  require(c_alpha > 0.0, "c_alpha", "must be positive");
  require(c_beta > 0.0, "c_beta", "must be positive");
  require(s0 > 0.0, "s0", "must be positive");
  require(p_s > 0.5, "p_s", "must exceed 1/2 so that s_k is square-summable");
  require(tau0 > 0.0, "tau0", "must be positive");
  require(p_tau > 0.0, "p_tau", "must be positive");
  require(near_exact_target > 0.0, "near_exact_target", "must be positive");
  require(tol > 0.0, "tol", "must be positive");
  require(rel_tol > 0.0, "rel_tol", "must be positive");
  require(t_tol > 0.0, "t_tol", "must be positive");
  require(stop_rule != StopRule::MetricBelow || metric_tol > 0.0, "metric_tol",
          "must be positive for the MetricBelow stop rule");
  require(max_outer >= 1, "max_outer", "must be at least 1");
  require(inner_max_iter >= 0, "inner_max_iter", "must be nonnegative");
  require(ll_max_iter >= 0, "ll_max_iter", "must be nonnegative");
  require(trace_flush_every >= 1, "trace_flush_every", "must be at least 1");

  if (out.inner_max_iter == 0) out.inner_max_iter = default_inner_max_iter(dims.m);
  if (out.ll_max_iter == 0) out.ll_max_iter = 10 * default_inner_max_iter(dims.m);
  return out;
}

double inexactness_target(int k, const AgilsConfig& cfg, double G_prev) {
  switch (cfg.variant) {
    case InexactnessVariant::Both: return std::max(cfg.s(k), cfg.tau(k) * G_prev);
    case InexactnessVariant::AbsoluteOnly: return cfg.s(k);
    case InexactnessVariant::RelativeOnly:
      return std::max(cfg.tau(k) * G_prev, kRelativeTargetFloor);
    case InexactnessVariant::NearExact: return cfg.near_exact_target;
    case InexactnessVariant::SingleStep: return std::numeric_limits<double>::infinity();
  }
  return cfg.s(k);
}

Vector direction_y(const BilevelOracle& oracle, const Vector& x, const Vector& y_tilde,
                   const Vector& theta_tilde, double p, double gamma) {
  return oracle.upper_gradient(x, y_tilde).y / p + oracle.lower_smooth_gradient(x, y_tilde).y -
         (y_tilde - theta_tilde) / gamma;
}

Vector update_y(const BilevelOracle& oracle, const Vector& x, const Vector& y_tilde,
                const Vector& d_y, double beta) {
  return oracle.prox_lower_nonsmooth(x, y_tilde - beta * d_y, beta);
}

Vector direction_x(const BilevelOracle& oracle, const Vector& x, const Vector& y_next,
                   const Vector& theta_half, double p) {
  return oracle.upper_gradient(x, y_next).x / p + oracle.lower_smooth_gradient(x, y_next).x +
         oracle.lower_nonsmooth_grad_x(x, y_next) - oracle.lower_smooth_gradient(x, theta_half).x -
         oracle.lower_nonsmooth_grad_x(x, theta_half);
}

Vector update_x(const BilevelOracle& oracle, const Vector& x, const Vector& d_x, double alpha) {
  return oracle.project_x(x - alpha * d_x);
}

double constraint_violation_estimate(const BilevelOracle& oracle, const Vector& x,
                                     const Vector& y, const Vector& theta, double gamma,
                                     double epsilon) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const double gap = oracle.lower(x, y) - oracle.lower(x, theta) -
                     (theta - y).squaredNorm() / (2.0 * gamma) - epsilon;
  return std::max(gap, 0.0);
}

double penalized_value(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                       const Vector& theta, double p, double gamma) {
  return oracle.upper(x, y) / p + oracle.lower(x, y) -
         (oracle.lower(x, theta) + (theta - y).squaredNorm() / (2.0 * gamma));
}

PenaltyCase classify_penalty_case(double delta, double t, double p, double gap_norm,
                                  const AgilsConfig& cfg) {
  if (delta >= cfg.c_p * std::min(1.0 / p, t)) return PenaltyCase::KeepPenalty;
  if (gap_norm <= cfg.c_y * cfg.gamma.value() / p) return PenaltyCase::IncreasePenalty;
  return PenaltyCase::Correct;
}

bool should_stop(const StopInputs& in, const AgilsConfig& cfg) {
  if (in.k < 1) return false;
  switch (cfg.stop_rule) {
    case StopRule::MaxResidual: return std::max({in.delta, cfg.s(in.k), in.t}) <= cfg.tol;
    case StopRule::RelChangeAndT: return in.rel_change < cfg.rel_tol && in.t < cfg.t_tol;
    case StopRule::MetricBelow: return in.metric < cfg.metric_tol;
  }
  return false;
}

AgilsSolver::AgilsSolver(const BilevelOracle& oracle, const AgilsConfig& cfg)
    : oracle_(oracle), constants_(oracle.constants()), cfg_(cfg.resolved(constants_, oracle.dims())) {}

IterateState AgilsSolver::initial_state(const AgilsInit& init) const {
  const Dims d = oracle_.dims();
  if (init.x0.size() != d.n || init.y0.size() != d.m || init.theta0.size() != d.m) {
    throw std::invalid_argument("initial point dimensions do not match the oracle");
  }
  IterateState s;
  s.k = 0;
  s.x = init.x0;
  s.y = init.y0;
  s.y_tilde = init.y0;
  s.theta = init.theta0;
  s.theta_tilde = init.theta0;
  s.p = cfg_.p0;
  s.G_curr = prox_grad_residual(oracle_, s.x, s.theta_tilde, s.y, *cfg_.gamma, *cfg_.eta);
  s.G_prev = s.G_curr;
  return s;
}

InnerResult AgilsSolver::inner_solve(const Vector& x, const Vector& y, double target,
                                     const Vector& warm) const {
  if (cfg_.variant == InexactnessVariant::SingleStep) {
    return prox_ll_single_step(oracle_, x, y, *cfg_.gamma, *cfg_.eta, warm);
  }
  return solve_prox_ll(oracle_, x, y, *cfg_.gamma, *cfg_.eta, target, warm, cfg_.inner_method,
                       cfg_.inner_max_iter);
}

AgilsSolver::CorrectionOutcome AgilsSolver::feasibility_correction(const IterateState& state,
                                                                   const Vector& x_next,
                                                                   const Vector& y_next,
                                                                   const Vector& theta_next,
                                                                   double delta) const {
  const double gamma = *cfg_.gamma;
  CorrectionOutcome out;
  auto reject = [&] {
    out.accepted = false;
    out.y_tilde = y_next;
    out.theta_tilde = theta_next;
    out.p = state.p + cfg_.rho_p;
  };

  const double ll_target = std::max(cfg_.c_ytilde / state.p * delta, kRelativeTargetFloor);
  InnerResult candidate = solve_ll(oracle_, x_next, ll_target, y_next, cfg_.ll_max_iter);
  out.ll_iters = candidate.iterations;
  if (!candidate.converged()) {
    out.ll_failed = true;
    reject();
    return out;
  }

  const double target = inexactness_target(state.k + 1, cfg_, state.G_curr);
  InnerResult theta_tilde = inner_solve(x_next, candidate.theta, target, theta_next);
  out.inner_iters = theta_tilde.iterations;
  if (!theta_tilde.converged()) {
    out.ll_failed = true;
    reject();
    return out;
  }

  const double lhs = penalized_value(oracle_, x_next, candidate.theta, theta_tilde.theta, state.p, gamma);
  const double rhs = penalized_value(oracle_, x_next, y_next, theta_next, state.p, gamma);
  if (lhs <= rhs) {
    out.accepted = true;
    out.y_tilde = std::move(candidate.theta);
    out.theta_tilde = std::move(theta_tilde.theta);
    out.p = state.p;
  } else {
    reject();
  }
  return out;
}

AgilsSolver::CorrectionOutcome AgilsSolver::penalty_and_correction_step(const IterateState& state,
                                                                        IterateState& next) const {
  const double gap = (next.y - next.theta).norm();
  CorrectionOutcome out;
  switch (classify_penalty_case(next.delta, next.t, state.p, gap, cfg_)) {
    case PenaltyCase::KeepPenalty:
      out.p = state.p;
      next.case_taken = CaseTaken::Case1;
      break;
    case PenaltyCase::IncreasePenalty:
      out.p = state.p + cfg_.rho_p;
      next.case_taken = CaseTaken::Case2;
      break;
    case PenaltyCase::Correct:
      out = feasibility_correction(state, next.x, next.y, next.theta, next.delta);
      next.case_taken = out.accepted ? CaseTaken::Case3Accepted : CaseTaken::Case3Rejected;
      next.p = out.p;
      next.y_tilde = std::move(out.y_tilde);
      next.theta_tilde = std::move(out.theta_tilde);
      return out;
  }
  next.p = out.p;
  next.y_tilde = next.y;
  next.theta_tilde = next.theta;
  return out;
}

AgilsResult AgilsSolver::solve(const AgilsInit& init, const SolveHooks& hooks) const {
  if (cfg_.stop_rule == StopRule::MetricBelow && !hooks.metric) {
    throw std::invalid_argument("MetricBelow stop rule requires a metric hook");
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  const double gamma = *cfg_.gamma;
  const double F_low = oracle_.upper_lower_bound();
  IterateState s = initial_state(init);
  RunTrace trace;
  std::size_t flushed = 0;
  auto flush = [&](bool final) {
    if (!hooks.on_flush) return;
    const std::size_t pending = trace.records.size() - flushed;
    if (pending == 0 || (!final && pending < static_cast<std::size_t>(cfg_.trace_flush_every))) return;
    hooks.on_flush(std::span<const IterationRecord>(trace.records).subspan(flushed));
    flushed = trace.records.size();
  };

  for (int k = 0;; ++k) {
    if (k >= cfg_.max_outer) {
      trace.termination = Termination::MaxOuterExceeded;
      break;
    }
    s.k = k;
    const StepSizes steps = default_stepsizes(constants_, s.p, cfg_.c_alpha, cfg_.c_beta);

    const Vector d_y = direction_y(oracle_, s.x, s.y_tilde, s.theta_tilde, s.p, gamma);
    Vector y_next = update_y(oracle_, s.x, s.y_tilde, d_y, steps.beta);
    const double target_half = inexactness_target(k, cfg_, s.G_prev);
    InnerResult half = inner_solve(s.x, y_next, target_half, s.theta);

    const Vector d_x = direction_x(oracle_, s.x, y_next, half.theta, s.p);
    Vector x_next = update_x(oracle_, s.x, d_x, steps.alpha);
    const double target_full = inexactness_target(k + 1, cfg_, s.G_curr);
    InnerResult full = inner_solve(x_next, y_next, target_full, half.theta);

    IterateState n;
    n.k = k + 1;
    n.delta = std::sqrt((x_next - s.x).squaredNorm() + (y_next - s.y_tilde).squaredNorm());
    n.t = constraint_violation_estimate(oracle_, x_next, y_next, full.theta, gamma, cfg_.epsilon);
    n.G_prev = s.G_curr;
    n.G_curr = full.residual;
    const double rel_change =
        std::sqrt((x_next - s.x).squaredNorm() + (y_next - s.y).squaredNorm()) /
        std::sqrt(1.0 + s.x.squaredNorm() + s.y.squaredNorm());
    n.x = std::move(x_next);
    n.y = std::move(y_next);
    n.theta = std::move(full.theta);

    IterationRecord rec;
    rec.k = k;
    rec.p = s.p;
    rec.alpha = steps.alpha;
    rec.beta = steps.beta;
    rec.delta = n.delta;
    rec.t = n.t;
    rec.G_half = half.residual;
    rec.G_full = full.residual;
    rec.target_half = target_half;
    rec.target_full = target_full;
    rec.inner_iters_half = half.iterations;
    rec.inner_iters_full = full.iterations;
    rec.inner_failed = !half.converged() || !full.converged();
    rec.err_or_val = hooks.metric ? hooks.metric(n.x, n.y) : std::numeric_limits<double>::quiet_NaN();

    const bool stop = should_stop({k, n.delta, n.t, rel_change, rec.err_or_val}, cfg_);
    if (stop) {
      n.p = s.p;
      n.y_tilde = n.y;
      n.theta_tilde = n.theta;
      n.case_taken = CaseTaken::Case1;
    } else {
      const CorrectionOutcome c = penalty_and_correction_step(s, n);
      trace.total_inner_iterations += c.inner_iters;
      trace.total_ll_iterations += c.ll_iters;
      if (c.ll_failed) rec.inner_failed = true;
      if (n.case_taken == CaseTaken::Case3Accepted || n.case_taken == CaseTaken::Case3Rejected) {
        ++trace.corrections;
      }
    }
    rec.case_taken = n.case_taken;
    rec.psi_tilde_proxy = (oracle_.upper(n.x, n.y_tilde) - F_low) / s.p + oracle_.lower(n.x, n.y_tilde) -
                          (oracle_.lower(n.x, n.theta_tilde) +
                           (n.theta_tilde - n.y_tilde).squaredNorm() / (2.0 * gamma));
    rec.wall_time_ms = cfg_.record_timing ? elapsed_ms() : 0.0;

    trace.total_inner_iterations += half.iterations + full.iterations;
    if (rec.inner_failed) ++trace.inner_failures;
    trace.records.push_back(rec);
    trace.outer_iterations = k + 1;
    flush(false);

    s = std::move(n);
    if (stop) {
      trace.termination = Termination::Converged;
      break;
    }
  }
  flush(true);

  trace.final_p = s.p;
  trace.wall_time_ms = cfg_.record_timing ? elapsed_ms() : 0.0;
  AgilsResult result;
  result.x = s.x;
  result.y_tilde = s.y_tilde;
  result.final_state = std::move(s);
  result.trace = std::move(trace);
  return result;
}

AgilsResult agils_solve(const BilevelOracle& oracle, const AgilsConfig& cfg, const AgilsInit& init,
                        const SolveHooks& hooks) {
  return AgilsSolver(oracle, cfg).solve(init, hooks);
}

}  // namespace agils
