#pragma once

// Policy gradient under the Hadamard parameterization pi(a|s) = theta_{s,a}^2.
//
// Two equivalent steppers are provided: the sphere-constrained Riemannian
// ascent (parameters renormalized onto the unit sphere each step) and the
// projection-free variant on the normalized parameterization
// pi(a|s) = theta_{s,a}^2 / |theta_s|^2. From the same starting policy they
// generate the same policy sequence.

#include "hpg/mdp.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hpg {

/// Step-size settings. In the kappa-driven regime eta = (1-gamma)^2 kappa / 4.
struct StepConfig {
  std::optional<double> kappa;
  double eta = 0.0;
  int max_iters = 0;

  static StepConfig from_kappa(double kappa, double gamma, int max_iters);
  /// Raw step size, no kappa. Only meaningful for the bandit reproduction.
  static StepConfig from_eta(double eta, int max_iters);
};

/// Per-state unit-norm parameter rows with no zero entries.
class SphereParams {
 public:
  static SphereParams from_matrix(Matrix theta);
  /// theta_{s,a} = 1/sqrt(|A|).
  static SphereParams uniform(int num_states, int num_actions);
  /// Seeded random nonzero rows projected onto the sphere.
  static SphereParams random(std::uint64_t seed, int num_states, int num_actions);
  /// theta = sqrt(pi), entrywise. pi must be strictly positive.
  static SphereParams from_policy(const Policy& pi);

  const Matrix& theta() const noexcept { return theta_; }
  Policy policy() const;

 private:
  explicit SphereParams(Matrix theta) : theta_(std::move(theta)) {}
  Matrix theta_;
};

/// Unconstrained parameters of the normalized parameterization.
class FreeParams {
 public:
  static FreeParams from_matrix(Matrix theta);

  const Matrix& theta() const noexcept { return theta_; }
  Vector row_norms() const { return theta_.rowwise().norm(); }
  Policy policy() const;

 private:
  explicit FreeParams(Matrix theta) : theta_(std::move(theta)) {}
  Matrix theta_;
};

/// g_{s,a} = 2 theta_{s,a} d(s) A(s,a) / (1-gamma); tangent to the sphere at
/// theta_s. `vb` must belong to the policy induced by `params`.
Matrix riemannian_gradient(const TabularMdp& mdp, const SphereParams& params,
                           const ValueBundle& vb);

/// Gradient of the per-iteration surrogate L_k at theta = theta^k:
/// dL/dtheta_{s,a} = 2 d(s) theta_{s,a} A(s,a) / (1-gamma).
Matrix normalized_gradient(const TabularMdp& mdp, const FreeParams& params,
                           const ValueBundle& vb);

struct SphereStep {
  SphereParams params;
  Policy policy;
};

struct FreeStep {
  FreeParams params;
  Policy policy;
};

/// One sphere-constrained step. The returned policy is the closed-form
/// squared-ratio update, which agrees with params.policy() to rounding.
SphereStep hadamard_step(const TabularMdp& mdp, const SphereParams& params, const StepConfig& cfg);
SphereStep hadamard_step(const TabularMdp& mdp, const SphereParams& params, const StepConfig& cfg,
                         const ValueBundle& vb);

/// One projection-free step theta' = theta + eta * grad L_k(theta).
FreeStep normalized_step(const TabularMdp& mdp, const FreeParams& params, const StepConfig& cfg);
FreeStep normalized_step(const TabularMdp& mdp, const FreeParams& params, const StepConfig& cfg,
                         const ValueBundle& vb);

/// Closed-form pi^{k+1} - pi^k of one sphere step taken from `pi`.
Matrix policy_delta(const TabularMdp& mdp, const Policy& pi, const ValueBundle& vb,
                    const StepConfig& cfg);

struct IterationRecord {
  int k = 0;
  Policy policy;
  double v_mu = 0.0;
  double delta = 0.0;             // V*(mu) - V^k(mu)
  Vector v;                       // V^k(s)
  Vector visitation;              // d^k_mu(s)
  Vector b;                       // non-optimal mass per state
  Vector grad_norm;               // |g_s^k|
  Vector expected_sq_adv;         // E_{a~pi^k}[(A^k(s,a))^2]
};

struct RunTrace {
  double gamma = 0.0;
  std::optional<double> kappa;
  double eta = 0.0;
  double v_star_mu = 0.0;
  std::vector<IterationRecord> records;

  int num_states() const;
  int last_iteration() const { return records.empty() ? -1 : records.back().k; }
};

/// Runs cfg.max_iters sphere steps; records iterations 0..max_iters.
RunTrace run(const TabularMdp& mdp, const SphereParams& init, const StepConfig& cfg,
             const OptimalBundle& opt);

/// Same diagnostics for the projection-free recursion.
RunTrace run_normalized(const TabularMdp& mdp, const FreeParams& init, const StepConfig& cfg,
                        const OptimalBundle& opt);

}  // namespace hpg
