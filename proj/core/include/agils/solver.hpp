#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "agils/inner.hpp"
#include "agils/problem.hpp"

namespace agils {

/// How the inner proximal lower-level solves are stopped.
enum class InexactnessVariant {
  Both,          // G <= max(s_k, tau_k * G_prev)
  AbsoluteOnly,  // G <= s_k
  RelativeOnly,  // G <= tau_k * G_prev
  NearExact,     // G <= near_exact_target
  SingleStep,    // one proximal-gradient step, no target
};

enum class StopRule {
  MaxResidual,       // k >= 1 and max(Delta, s_k, t) <= tol
  RelChangeAndT,  // |z+ - z| / sqrt(1 + |z|^2) < rel_tol and t < t_tol
  MetricBelow,    // caller-supplied metric(x+, y+) < metric_tol
};

enum class CaseTaken { Case1, Case2, Case3Accepted, Case3Rejected };

enum class Termination { Converged, MaxOuterExceeded };

std::string_view to_string(InexactnessVariant v);
std::string_view to_string(StopRule r);
std::string_view to_string(CaseTaken c);
std::string_view to_string(Termination t);
InexactnessVariant parse_variant(std::string_view name);
StopRule parse_stop_rule(std::string_view name);
CaseTaken parse_case(std::string_view name);

/// Every algorithm parameter. Unset `gamma`/`eta` are resolved from the
/// problem constants: gamma = 1/(rho_f2 + rho_g2), eta = 1/(L_fy + 1/gamma).
struct AgilsConfig {
  std::optional<double> gamma;
  double epsilon = 1e-6;
  std::optional<double> eta;

  double p0 = 0.5;
  double rho_p = 0.02;
  double c_p = 1.0;
  double c_y = 1.0;
  double c_ytilde = 1.0;
  double c_alpha = 0.1;
  double c_beta = 0.1;

  // s_k = s0/(k+1)^p_s, tau_k = tau0/(k+1)^p_tau
  double s0 = 0.05;
  double p_s = 1.05;
  double tau0 = 20.0;
  double p_tau = 0.7;

  InexactnessVariant variant = InexactnessVariant::Both;
  double near_exact_target = 1e-10;
  InnerMethod inner_method = InnerMethod::PGM;
  int inner_max_iter = 0;  // 0 selects default_inner_max_iter(m)
  int ll_max_iter = 0;     // cap for feasibility-correction LL solves; 0 selects 10x default

  StopRule stop_rule = StopRule::MaxResidual;
  double tol = 1e-4;
  double rel_tol = 1e-5;
  double t_tol = 0.1;
  double metric_tol = 0.0;
  int max_outer = 10000;

  bool strict_gamma = false;
  bool record_timing = true;
  int trace_flush_every = 1000;

  /// Returns a copy with gamma/eta/inner caps filled in, after validating
  /// every field. Throws std::invalid_argument with the offending field name.
  AgilsConfig resolved(const ProblemConstants& c, const Dims& dims) const;

  double s(int k) const;
  double tau(int k) const;
};

/// Per-iteration state of the outer loop.
struct IterateState {
  int k = 0;
  Vector x;
  Vector y;
  Vector y_tilde;
  Vector theta;
  Vector theta_tilde;
  double p = 0.0;
  double G_prev = 0.0;  // G(theta^{k-1}, x^{k-1}, y^{k-1})
  double G_curr = 0.0;  // G(theta^k, x^k, y^k)
  double delta = 0.0;
  double t = 0.0;
  CaseTaken case_taken = CaseTaken::Case1;
};

struct IterationRecord {
  int k = 0;
  double p = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double G_half = 0.0;
  double G_full = 0.0;
  double target_half = 0.0;
  double target_full = 0.0;
  int inner_iters_half = 0;
  int inner_iters_full = 0;
  double psi_tilde_proxy = 0.0;
  CaseTaken case_taken = CaseTaken::Case1;
  bool inner_failed = false;
  double err_or_val = 0.0;  // caller metric at (x^{k+1}, y^{k+1}); NaN when not supplied
  double wall_time_ms = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxOuterExceeded;
  int outer_iterations = 0;
  long long total_inner_iterations = 0;
  long long total_ll_iterations = 0;  // feasibility-correction LL solves
  int corrections = 0;                // Case 3 events
  int inner_failures = 0;
  double final_p = 0.0;
  double wall_time_ms = 0.0;

  double inner_to_outer_ratio() const {
    return outer_iterations > 0 ? static_cast<double>(total_inner_iterations) / outer_iterations : 0.0;
  }
};

struct AgilsInit {
  Vector x0;
  Vector y0;
  Vector theta0;
};

struct AgilsResult {
  Vector x;
  Vector y_tilde;
  IterateState final_state;
  RunTrace trace;
};

struct SolveHooks {
  /// Evaluated at (x^{k+1}, y^{k+1}) each iteration; required by MetricBelow.
  std::function<double(const Vector& x, const Vector& y)> metric;
  /// Receives batches of `trace_flush_every` records as they complete, then
  /// the remainder at exit.
  std::function<void(std::span<const IterationRecord>)> on_flush;
};

/// Inexactness target for the inner solve indexed by k.
///   Both -> max(s_k, tau_k G_prev); AbsoluteOnly -> s_k;
///   RelativeOnly -> max(tau_k G_prev, 1e-14); NearExact -> near_exact_target;
///   SingleStep -> +inf.
double inexactness_target(int k, const AgilsConfig& cfg, double G_prev);

/// (1/p) grad_y F(x, yt) + grad_y f(x, yt) - (yt - theta_t)/gamma.
Vector direction_y(const BilevelOracle& oracle, const Vector& x, const Vector& y_tilde,
                   const Vector& theta_tilde, double p, double gamma);

/// Prox_{beta g~(x,.)}(y_tilde - beta d_y).
Vector update_y(const BilevelOracle& oracle, const Vector& x, const Vector& y_tilde,
                const Vector& d_y, double beta);

/// (1/p) grad_x F(x, y+) + grad_x phi(x, y+) - grad_x f(x, theta) - grad_x g(x, theta).
Vector direction_x(const BilevelOracle& oracle, const Vector& x, const Vector& y_next,
                   const Vector& theta_half, double p);

/// Proj_X(x - alpha d_x).
Vector update_x(const BilevelOracle& oracle, const Vector& x, const Vector& d_x, double alpha);

/// max{ phi(x,y) - phi(x,theta) - |theta - y|^2/(2 gamma) - epsilon, 0 }.
double constraint_violation_estimate(const BilevelOracle& oracle, const Vector& x,
                                     const Vector& y, const Vector& theta, double gamma,
                                     double epsilon);

/// Penalized working value (1/p)F(x,y) + phi(x,y) - (phi(x,theta) + |theta-y|^2/(2 gamma)),
/// the quantity compared by the feasibility-correction descent test.
double penalized_value(const BilevelOracle& oracle, const Vector& x, const Vector& y,
                       const Vector& theta, double p, double gamma);

enum class PenaltyCase { KeepPenalty, IncreasePenalty, Correct };

/// Case logic of the penalty update: Case 1 when Delta >= c_p min(1/p, t);
/// otherwise Case 2 when |y - theta| <= c_y gamma/p, else correction.
PenaltyCase classify_penalty_case(double delta, double t, double p, double gap_norm,
                                  const AgilsConfig& cfg);

struct StopInputs {
  int k = 0;
  double delta = 0.0;
  double t = 0.0;
  double rel_change = 0.0;
  double metric = 0.0;
};

bool should_stop(const StopInputs& in, const AgilsConfig& cfg);

/// One AGILS run on a fixed oracle. Construction resolves and validates the
/// configuration; each method is usable on its own for testing.
class AgilsSolver {
 public:
  AgilsSolver(const BilevelOracle& oracle, const AgilsConfig& cfg);

  const AgilsConfig& config() const { return cfg_; }

  /// Initial state: x^0, y^0 = y~^0, theta^0 = theta~^0 = theta0, p = p0 and
  /// G_prev = G_curr = G(theta0, x0, y0).
  IterateState initial_state(const AgilsInit& init) const;

  /// Inner solve honoring the configured variant and method.
  InnerResult inner_solve(const Vector& x, const Vector& y, double target, const Vector& warm) const;

  struct CorrectionOutcome {
    Vector y_tilde;
    Vector theta_tilde;
    double p = 0.0;
    bool accepted = false;
    bool ll_failed = false;
    int inner_iters = 0;
    int ll_iters = 0;
  };

  /// Feasibility correction at (x+, y+, theta+). `state` supplies k, p and
  /// G_curr for the theta~ target.
  CorrectionOutcome feasibility_correction(const IterateState& state, const Vector& x_next,
                                           const Vector& y_next, const Vector& theta_next,
                                           double delta) const;

  /// Applies the penalty update and, in Case 3, the correction. Writes
  /// y_tilde, theta_tilde, p and case_taken into `next` (which must already
  /// hold x, y, theta, delta, t of iteration k+1); `state` is iteration k.
  CorrectionOutcome penalty_and_correction_step(const IterateState& state, IterateState& next) const;

  AgilsResult solve(const AgilsInit& init, const SolveHooks& hooks = {}) const;

 private:
  const BilevelOracle& oracle_;
  ProblemConstants constants_;
  AgilsConfig cfg_;
};

/// Convenience wrapper around AgilsSolver::solve.
AgilsResult agils_solve(const BilevelOracle& oracle, const AgilsConfig& cfg, const AgilsInit& init,
                        const SolveHooks& hooks = {});

}  // namespace agils
