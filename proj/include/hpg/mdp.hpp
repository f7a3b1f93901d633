#pragma once

// Finite discounted MDPs, exact policy evaluation and the Bellman optimality
// solver used as ground truth by every algorithm and audit in this library.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace hpg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  DimensionMismatch,
  RowNotStochastic,
  RewardOutOfRange,
  DegenerateInitial,
  BadDiscount,
  InvalidPolicy,
  SingularSystem,
  NonConvergence,
  InvalidParams,
  ZeroRow,
  ZeroParameter,
  IoFailure,
  InvalidSpec,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Unvalidated MDP description. Nesting of transition and reward is
/// [state][action][next_state].
struct RawMdp {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  std::vector<double> mu;
  std::vector<std::vector<std::vector<double>>> transition;
  std::vector<std::vector<std::vector<double>>> reward;
};

/// A validated finite MDP. Only obtainable through validate_mdp(), so every
/// instance satisfies: stochastic transition rows, rewards in [0,1],
/// strictly positive initial distribution and gamma in [0,1).
class TabularMdp {
 public:
  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  double gamma() const noexcept { return gamma_; }
  const Vector& mu() const noexcept { return mu_; }
  /// Smallest initial-state probability.
  double mu_tilde() const noexcept { return mu_.minCoeff(); }

  /// (S*A) x S matrix; row s*A + a is P(.|s,a).
  const Matrix& transition() const noexcept { return transition_; }
  /// (S*A) x S matrix; row s*A + a is r(s,a,.).
  const Matrix& reward() const noexcept { return reward_; }
  /// S x A matrix of sum_{s'} P(s'|s,a) r(s,a,s').
  const Matrix& expected_reward() const noexcept { return expected_reward_; }

  int row(int s, int a) const noexcept { return s * num_actions_ + a; }

  RawMdp to_raw() const;

 private:
  friend TabularMdp validate_mdp(const RawMdp& raw);
  TabularMdp() = default;

  int num_states_ = 0;
  int num_actions_ = 0;
  double gamma_ = 0.0;
  Vector mu_;
  Matrix transition_;
  Matrix reward_;
  Matrix expected_reward_;
};

TabularMdp validate_mdp(const RawMdp& raw);

/// Row-stochastic state -> action-distribution table.
class Policy {
 public:
  explicit Policy(Matrix probs);

  static Policy uniform(int num_states, int num_actions);

  const Matrix& probs() const noexcept { return probs_; }
  double operator()(int s, int a) const { return probs_(s, a); }
  int num_states() const noexcept { return static_cast<int>(probs_.rows()); }
  int num_actions() const noexcept { return static_cast<int>(probs_.cols()); }

 private:
  Matrix probs_;
};

struct ValueBundle {
  Vector v;           // V^pi(s)
  Matrix q;           // Q^pi(s,a), S x A
  Matrix adv;         // Q^pi - V^pi
  Vector visitation;  // d^pi_mu
  double v_mu = 0.0;  // V^pi(mu)
};

struct OptimalBundle {
  Vector v_star;
  Matrix q_star;
  /// optimal(s,a) != 0 iff a is in the optimal action set at s.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> optimal;
  /// Min / max of Q* over non-optimal actions; 0 / V*(s) when every action
  /// is optimal.
  Vector v_hat;
  Vector v_tilde;
  /// States that have at least one non-optimal action.
  std::vector<int> s_tilde;
  double bellman_residual = 0.0;
  int iterations = 0;

  std::vector<int> optimal_actions(int s) const;
};

inline constexpr double kDefaultOptimalTol = 1e-10;
inline constexpr double kDefaultTieTol = 1e-9;

/// Discounted state visitation d^pi_rho = (1-gamma) (I - gamma P_pi^T)^{-1} rho.
Vector visitation(const TabularMdp& mdp, const Policy& pi, const Vector& rho);

ValueBundle policy_evaluation(const TabularMdp& mdp, const Policy& pi);

/// Value iteration down to a Bellman residual of tol*(1-gamma)/(2*gamma),
/// then exact evaluation of the greedy policy (policy-iteration polish) so
/// V* is accurate to solver precision rather than to tol.
OptimalBundle solve_optimal(const TabularMdp& mdp, double tol = kDefaultOptimalTol,
                            double tie_tol = kDefaultTieTol);

/// Per-state probability mass that pi places on non-optimal actions.
Vector b_gap(const Policy& pi, const OptimalBundle& opt);

/// (1/(1-gamma)) E_{s~d_rho^{pi1}} E_{a~pi1} [A^{pi2}(s,a)].
double performance_difference(const TabularMdp& mdp, const Policy& pi1, const Policy& pi2,
                              const Vector& rho);

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = V*(rho) - V^pi(rho);
/// rhs = max_s (V*(s) - V_hat(s)) / (1-gamma) * E_{s~d_rho^pi}[b_s^pi].
BoundPair value_error_bound(const TabularMdp& mdp, const Policy& pi, const OptimalBundle& opt,
                            const Vector& rho);

}  // namespace hpg
