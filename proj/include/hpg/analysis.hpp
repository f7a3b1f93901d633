#pragma once

// Convergence constants of the sphere-constrained Hadamard PG and an auditor
// that replays a recorded RunTrace against every rate and inequality.

#include "hpg/hadamard.hpp"
#include "hpg/mdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hpg {

/// Optional fields are NotApplicable when no state has a non-optimal action,
/// or (rho, c_local) until bound to a trace that reaches ceil(k0).
struct TheoremConstants {
  double kappa = 0.0;
  double gamma = 0.0;
  double mu_tilde = 0.0;
  double lambda_hat = 0.0;
  /// 3 kappa mu_tilde^2 (1-gamma)^4 lambda / (4 + kappa^2).
  double g_value = 0.0;
  /// Same with (1 - gamma^4) in place of (1-gamma)^4; reported, never audited.
  double g_statement_form = 0.0;
  std::optional<double> m1;
  std::optional<double> k0;
  /// rho = rho_scale * (1 - max_s b_s at iteration ceil(k0/2)).
  std::optional<double> rho_scale;
  std::optional<double> rho;
  std::optional<double> c_local;
  /// max_s (V*(s) - V_hat(s)) / (1-gamma).
  double c_global = 0.0;
  /// Coefficient of the per-step improvement lower bound,
  /// 3 kappa mu_tilde^2 (1-gamma)^2 / (4 + kappa^2).
  double improvement_coef = 0.0;
};

TheoremConstants compute_constants(const TabularMdp& mdp, const OptimalBundle& opt, double kappa,
                                   double lambda_hat);

/// Fills rho and c_local from the b-gaps recorded at ceil(k0/2) and ceil(k0).
/// Leaves them empty if k0 is not applicable or the trace is too short.
TheoremConstants bind_trace(TheoremConstants consts, const RunTrace& trace);

/// min over recorded k of min_s (1 - b_s^k).
double estimate_lambda(const RunTrace& trace);

enum class CheckStatus { Pass, Fail, Skipped };

const char* to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  double tolerance = 0.0;
  /// Largest (lhs - rhs) seen; negative means slack everywhere.
  std::optional<double> worst_violation;
  std::optional<int> at_iteration;
  std::string note;
};

struct AuditReport {
  TheoremConstants constants;
  std::vector<CheckResult> checks;

  bool all_passed() const;
  const CheckResult& check(const std::string& name) const;
};

namespace checks {
inline constexpr const char* kMonotone = "monotone_improvement";
inline constexpr const char* kImprovementBound = "improvement_lower_bound";
inline constexpr const char* kStepCap = "step_size_cap";
inline constexpr const char* kSublinear = "sublinear_rate";
inline constexpr const char* kSublinearHalfLambda = "sublinear_rate_half_lambda";
inline constexpr const char* kLocalLinear = "local_linear_rate";
inline constexpr const char* kGlobalLinear = "global_linear_rate";
inline constexpr const char* kValueErrorBound = "value_error_b_gap_bound";
inline constexpr const char* kBGapMonotone = "b_gap_monotone_after_k0";
inline constexpr const char* kMaxErrorBound = "max_error_over_mu_tilde";
}  // namespace checks

/// Replays `trace` against every bound. `consts` normally comes from
/// compute_constants(..., estimate_lambda(trace)); the trace-dependent
/// constants are bound internally.
AuditReport audit(const RunTrace& trace, const TabularMdp& mdp, const OptimalBundle& opt,
                  const TheoremConstants& consts, double tol);

}  // namespace hpg
