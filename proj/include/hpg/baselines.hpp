#pragma once

// Softmax PG / NPG comparison methods and the single-state bandit steppers.

#include "hpg/mdp.hpp"

namespace hpg {

/// Softmax logits, stored with each row shifted so its maximum is 0.
class SoftmaxParams {
 public:
  explicit SoftmaxParams(Matrix logits);
  static SoftmaxParams zeros(int num_states, int num_actions);

  const Matrix& logits() const noexcept { return logits_; }
  Policy policy() const;

 private:
  Matrix logits_;
};

/// theta' = theta + eta/(1-gamma) * d(s) * pi(a|s) * A(s,a).
SoftmaxParams softmax_pg_step(const TabularMdp& mdp, const SoftmaxParams& params, double eta);

/// theta' = theta + eta * A(s,a).
SoftmaxParams softmax_npg_step(const SoftmaxParams& params, const Matrix& adv, double eta);

/// K-armed bandit with rewards in [0,1].
class MabInstance {
 public:
  explicit MabInstance(Vector rewards);

  const Vector& rewards() const noexcept { return rewards_; }
  int num_arms() const noexcept { return static_cast<int>(rewards_.size()); }
  double best_reward() const { return rewards_.maxCoeff(); }

 private:
  Vector rewards_;
};

/// A(a) = r(a) - E_{a'~pi}[r(a')].
Vector mab_advantage(const Vector& pi, const MabInstance& inst);

/// One-shot value error max_a r(a) - E_{a~pi}[r(a)], accumulated as a sum of
/// nonnegative terms so it stays accurate near the optimum.
double mab_value_error(const Vector& pi, const MabInstance& inst);

/// Hadamard PG in the policy domain:
/// pi'(a) = pi(a) (1 + 2 eta A(a))^2 / (1 + 4 eta^2 E_pi[A^2]).
Vector mab_hadamard_step(const Vector& pi, const MabInstance& inst, double eta);

/// theta'_a = theta_a + eta * pi(a) * A(a) on a single-row SoftmaxParams.
SoftmaxParams mab_softmax_pg_step(const SoftmaxParams& params, const MabInstance& inst, double eta);

/// theta'_a = theta_a + eta * A(a) on a single-row SoftmaxParams.
SoftmaxParams mab_softmax_npg_step(const SoftmaxParams& params, const MabInstance& inst,
                                   double eta);

/// One-state, gamma = 0 MDP with r(s0, a, s0) = r(a).
TabularMdp mab_as_mdp(const MabInstance& inst);

}  // namespace hpg
