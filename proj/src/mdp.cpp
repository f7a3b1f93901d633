#include "hpg/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hpg {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr int kDirectSolveMaxStates = 512;
constexpr double kIterativeResidual = 1e-12;
constexpr long kIterativeCap = 50'000'000;
constexpr long kValueIterationCap = 10'000'000;

std::string describe(const char* what, int s, int a) {
  std::ostringstream os;
  os << what << " at (s=" << s << ", a=" << a << ")";
  return os.str();
}

// Solves (I - gamma * m) x = b.
Vector solve_discounted(const Matrix& m, const Vector& b, double gamma) {
  const auto n = m.rows();
  if (n <= kDirectSolveMaxStates) {
    Matrix lhs = Matrix::Identity(n, n) - gamma * m;
    Eigen::PartialPivLU<Matrix> lu(lhs);
    Vector x = lu.solve(b);
    if (!x.allFinite()) {
      throw Error(ErrorCode::SingularSystem, "discounted linear system is singular");
    }
    return x;
  }
  Vector x = b;
  for (long it = 0; it < kIterativeCap; ++it) {
    Vector next = b + gamma * (m * x);
    const double residual = (next - x).lpNorm<Eigen::Infinity>();
    x = std::move(next);
    if (residual <= kIterativeResidual) return x;
  }
  throw Error(ErrorCode::NonConvergence, "fixed-point policy evaluation did not converge");
}

Matrix policy_transition(const TabularMdp& mdp, const Matrix& probs) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  Matrix p = Matrix::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      p.row(s) += probs(s, a) * mdp.transition().row(mdp.row(s, a));
    }
  }
  return p;
}

// Q(s,a) = rbar(s,a) + gamma * sum_{s'} P(s'|s,a) v(s').
Matrix q_from_values(const TabularMdp& mdp, const Vector& v) {
  const Vector next = mdp.transition() * v;
  Matrix q(mdp.num_states(), mdp.num_actions());
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      q(s, a) = mdp.expected_reward()(s, a) + mdp.gamma() * next(mdp.row(s, a));
    }
  }
  return q;
}

void check_policy_shape(const TabularMdp& mdp, const Policy& pi) {
  if (pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions()) {
    throw Error(ErrorCode::DimensionMismatch, "policy dimensions do not match the MDP");
  }
}

void check_distribution(const TabularMdp& mdp, const Vector& rho) {
  if (rho.size() != mdp.num_states()) {
    throw Error(ErrorCode::DimensionMismatch, "state distribution has wrong length");
  }
  if ((rho.array() < 0.0).any() || std::abs(rho.sum() - 1.0) > kStochasticTol) {
    throw Error(ErrorCode::InvalidPolicy, "state distribution is not a probability vector");
  }
}

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RowNotStochastic: return "RowNotStochastic";
    case ErrorCode::RewardOutOfRange: return "RewardOutOfRange";
    case ErrorCode::DegenerateInitial: return "DegenerateInitial";
    case ErrorCode::BadDiscount: return "BadDiscount";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::ZeroParameter: return "ZeroParameter";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

TabularMdp validate_mdp(const RawMdp& raw) {
  const int S = raw.num_states;
  const int A = raw.num_actions;
  if (S < 1 || A < 1) {
    throw Error(ErrorCode::DimensionMismatch, "num_states and num_actions must be positive");
  }
  if (!(raw.gamma >= 0.0 && raw.gamma < 1.0)) {
    throw Error(ErrorCode::BadDiscount, "gamma must lie in [0,1)");
  }
  if (static_cast<int>(raw.mu.size()) != S || static_cast<int>(raw.transition.size()) != S ||
      static_cast<int>(raw.reward.size()) != S) {
    throw Error(ErrorCode::DimensionMismatch, "state dimension mismatch");
  }

  TabularMdp mdp;
  mdp.num_states_ = S;
  mdp.num_actions_ = A;
  mdp.gamma_ = raw.gamma;
  mdp.mu_ = Eigen::Map<const Vector>(raw.mu.data(), S);
  mdp.transition_.resize(S * A, S);
  mdp.reward_.resize(S * A, S);
  mdp.expected_reward_.resize(S, A);

  for (int s = 0; s < S; ++s) {
    if (static_cast<int>(raw.transition[s].size()) != A ||
        static_cast<int>(raw.reward[s].size()) != A) {
      throw Error(ErrorCode::DimensionMismatch, "action dimension mismatch");
    }
    for (int a = 0; a < A; ++a) {
      const auto& p = raw.transition[s][a];
      const auto& r = raw.reward[s][a];
      if (static_cast<int>(p.size()) != S || static_cast<int>(r.size()) != S) {
        throw Error(ErrorCode::DimensionMismatch, describe("next-state dimension mismatch", s, a));
      }
      double total = 0.0;
      for (int n = 0; n < S; ++n) {
        if (!(p[n] >= 0.0)) {
          throw Error(ErrorCode::RowNotStochastic, describe("negative transition probability", s, a));
        }
        if (!(r[n] >= 0.0 && r[n] <= 1.0)) {
          throw Error(ErrorCode::RewardOutOfRange, describe("reward outside [0,1]", s, a));
        }
        total += p[n];
        mdp.transition_(mdp.row(s, a), n) = p[n];
        mdp.reward_(mdp.row(s, a), n) = r[n];
      }
      if (std::abs(total - 1.0) > kStochasticTol) {
        throw Error(ErrorCode::RowNotStochastic, describe("transition row does not sum to 1", s, a));
      }
      mdp.expected_reward_(s, a) =
          mdp.transition_.row(mdp.row(s, a)).dot(mdp.reward_.row(mdp.row(s, a)));
    }
  }

  if ((mdp.mu_.array() < 0.0).any() || std::abs(mdp.mu_.sum() - 1.0) > kStochasticTol) {
    throw Error(ErrorCode::DegenerateInitial, "mu is not a probability vector");
  }
  if (!(mdp.mu_.minCoeff() > 0.0)) {
    throw Error(ErrorCode::DegenerateInitial, "mu must be strictly positive on every state");
  }
  return mdp;
}

RawMdp TabularMdp::to_raw() const {
  RawMdp raw;
  raw.num_states = num_states_;
  raw.num_actions = num_actions_;
  raw.gamma = gamma_;
  raw.mu.assign(mu_.data(), mu_.data() + mu_.size());
  raw.transition.assign(num_states_, std::vector<std::vector<double>>(num_actions_));
  raw.reward.assign(num_states_, std::vector<std::vector<double>>(num_actions_));
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      auto& p = raw.transition[s][a];
      auto& r = raw.reward[s][a];
      for (int n = 0; n < num_states_; ++n) {
        p.push_back(transition_(row(s, a), n));
        r.push_back(reward_(row(s, a), n));
      }
    }
  }
  return raw;
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) {
    throw Error(ErrorCode::InvalidPolicy, "policy must be non-empty");
  }
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    if (!(probs_.row(s).array() >= 0.0).all() ||
        std::abs(probs_.row(s).sum() - 1.0) > kStochasticTol) {
      std::ostringstream os;
      os << "row " << s << " is not a probability vector";
      throw Error(ErrorCode::InvalidPolicy, os.str());
    }
  }
}

Policy Policy::uniform(int num_states, int num_actions) {
  return Policy(Matrix::Constant(num_states, num_actions, 1.0 / num_actions));
}

std::vector<int> OptimalBundle::optimal_actions(int s) const {
  std::vector<int> out;
  for (Eigen::Index a = 0; a < optimal.cols(); ++a) {
    if (optimal(s, a)) out.push_back(static_cast<int>(a));
  }
  return out;
}

Vector visitation(const TabularMdp& mdp, const Policy& pi, const Vector& rho) {
  check_policy_shape(mdp, pi);
  check_distribution(mdp, rho);
  const Matrix p = policy_transition(mdp, pi.probs());
  return (1.0 - mdp.gamma()) * solve_discounted(p.transpose(), rho, mdp.gamma());
}

ValueBundle policy_evaluation(const TabularMdp& mdp, const Policy& pi) {
  check_policy_shape(mdp, pi);
  const double gamma = mdp.gamma();
  const Matrix p = policy_transition(mdp, pi.probs());
  const Vector r = pi.probs().cwiseProduct(mdp.expected_reward()).rowwise().sum();

  ValueBundle vb;
  vb.v = solve_discounted(p, r, gamma);
  vb.q = q_from_values(mdp, vb.v);
  vb.adv = vb.q.colwise() - vb.v;
  vb.visitation = (1.0 - gamma) * solve_discounted(p.transpose(), mdp.mu(), gamma);
  vb.v_mu = mdp.mu().dot(vb.v);
  return vb;
}

OptimalBundle solve_optimal(const TabularMdp& mdp, double tol, double tie_tol) {
  if (!(tol > 0.0) || !(tie_tol > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "solve_optimal needs positive tolerances");
  }
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const double gamma = mdp.gamma();
  const double target = gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : tol;

  OptimalBundle opt;
  Vector v = Vector::Zero(S);
  Matrix q;
  bool converged = false;
  for (long it = 0; it < kValueIterationCap; ++it) {
    q = q_from_values(mdp, v);
    Vector next = q.rowwise().maxCoeff();
    const double residual = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    ++opt.iterations;
    if (residual <= target) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NonConvergence, "value iteration hit its iteration cap");
  }

  // Polish: Howard policy iteration from the greedy policy. Terminates in
  // finitely many steps and leaves V* accurate to linear-solve precision.
  q = q_from_values(mdp, v);
  std::vector<int> greedy(S);
  for (int s = 0; s < S; ++s) q.row(s).maxCoeff(&greedy[s]);
  for (int round = 0; round <= S * A + 1; ++round) {
    Matrix probs = Matrix::Zero(S, A);
    for (int s = 0; s < S; ++s) probs(s, greedy[s]) = 1.0;
    const Matrix p = policy_transition(mdp, probs);
    const Vector r = probs.cwiseProduct(mdp.expected_reward()).rowwise().sum();
    v = solve_discounted(p, r, gamma);
    q = q_from_values(mdp, v);
    bool changed = false;
    for (int s = 0; s < S; ++s) {
      int best = 0;
      const double top = q.row(s).maxCoeff(&best);
      if (top > q(s, greedy[s]) + 1e-13 * (1.0 + std::abs(top))) {
        greedy[s] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }

  opt.v_star = v;
  opt.q_star = q;
  opt.bellman_residual = (q.rowwise().maxCoeff() - v).lpNorm<Eigen::Infinity>();
  if (opt.bellman_residual > tol) {
    throw Error(ErrorCode::NonConvergence, "Bellman residual above tolerance after polishing");
  }

  opt.optimal.resize(S, A);
  opt.v_hat = Vector::Zero(S);
  opt.v_tilde = Vector::Zero(S);
  for (int s = 0; s < S; ++s) {
    const double top = q.row(s).maxCoeff();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any_non_optimal = false;
    for (int a = 0; a < A; ++a) {
      opt.optimal(s, a) = q(s, a) >= top - tie_tol;
      if (!opt.optimal(s, a)) {
        any_non_optimal = true;
        lo = std::min(lo, q(s, a));
        hi = std::max(hi, q(s, a));
      }
    }
    if (any_non_optimal) {
      opt.s_tilde.push_back(s);
      opt.v_hat(s) = lo;
      opt.v_tilde(s) = hi;
    } else {
      opt.v_hat(s) = 0.0;
      opt.v_tilde(s) = opt.v_star(s);
    }
  }
  return opt;
}

Vector b_gap(const Policy& pi, const OptimalBundle& opt) {
  if (pi.num_states() != opt.optimal.rows() || pi.num_actions() != opt.optimal.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "policy and optimal bundle disagree on shape");
  }
  Vector b = Vector::Zero(pi.num_states());
  for (int s = 0; s < pi.num_states(); ++s) {
    for (int a = 0; a < pi.num_actions(); ++a) {
      if (!opt.optimal(s, a)) b(s) += pi(s, a);
    }
  }
  return b;
}

double performance_difference(const TabularMdp& mdp, const Policy& pi1, const Policy& pi2,
                              const Vector& rho) {
  const Vector d1 = visitation(mdp, pi1, rho);
  const ValueBundle vb2 = policy_evaluation(mdp, pi2);
  const Vector inner = pi1.probs().cwiseProduct(vb2.adv).rowwise().sum();
  return d1.dot(inner) / (1.0 - mdp.gamma());
}

BoundPair value_error_bound(const TabularMdp& mdp, const Policy& pi, const OptimalBundle& opt,
                            const Vector& rho) {
  const ValueBundle vb = policy_evaluation(mdp, pi);
  const Vector d = visitation(mdp, pi, rho);
  const double scale = (opt.v_star - opt.v_hat).maxCoeff() / (1.0 - mdp.gamma());
  BoundPair out;
  out.lhs = rho.dot(opt.v_star) - rho.dot(vb.v);
  out.rhs = scale * d.dot(b_gap(pi, opt));
  return out;
}

}  // namespace hpg
