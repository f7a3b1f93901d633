#pragma once

// Small instance builders and brute-force oracles shared by the tests. The
// oracles deliberately avoid the library's linear solves.

#include "hpg/mdp.hpp"
#include "hpg/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace hpg::test {

// Single-state MDP whose actions pay the given rewards and loop back.
inline TabularMdp bandit_mdp(const std::vector<double>& rewards, double gamma) {
  RawMdp raw;
  raw.num_states = 1;
  raw.num_actions = static_cast<int>(rewards.size());
  raw.gamma = gamma;
  raw.mu = {1.0};
  raw.transition.resize(1);
  raw.reward.resize(1);
  for (double r : rewards) {
    raw.transition[0].push_back({1.0});
    raw.reward[0].push_back({r});
  }
  return validate_mdp(raw);
}

// Two states that swap deterministically; reward 1 when leaving s0.
inline RawMdp flip_chain_raw(double gamma) {
  RawMdp raw;
  raw.num_states = 2;
  raw.num_actions = 1;
  raw.gamma = gamma;
  raw.mu = {0.75, 0.25};
  raw.transition = {{{0.0, 1.0}}, {{1.0, 0.0}}};
  raw.reward = {{{1.0, 1.0}}, {{0.0, 0.0}}};
  return raw;
}

inline Policy random_policy(std::uint64_t seed, int num_states, int num_actions) {
  Rng rng(seed);
  Matrix p(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) p(s, a) = 0.02 + rng.uniform();
    p.row(s) /= p.row(s).sum();
  }
  return Policy(std::move(p));
}

// Discounted sums accumulated along the exact state distribution, truncated
// once gamma^t is negligible.
struct RolloutOracle {
  Vector v;           // V(s) from each start state
  Vector visitation;  // (1-gamma) sum_t gamma^t Pr(s_t = s | s_0 ~ mu)
};

inline RolloutOracle rollout(const TabularMdp& mdp, const Policy& pi, int horizon = 10000) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const double gamma = mdp.gamma();
  RolloutOracle out{Vector::Zero(S), Vector::Zero(S)};
  auto step_dist = [&](const Vector& dist) {
    Vector next = Vector::Zero(S);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        for (int n = 0; n < S; ++n) {
          next(n) += dist(s) * pi(s, a) * mdp.transition()(s * A + a, n);
        }
      }
    }
    return next;
  };
  auto expected_r = [&](const Vector& dist) {
    double r = 0.0;
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        for (int n = 0; n < S; ++n) {
          r += dist(s) * pi(s, a) * mdp.transition()(s * A + a, n) * mdp.reward()(s * A + a, n);
        }
      }
    }
    return r;
  };
  for (int start = 0; start < S; ++start) {
    Vector dist = Vector::Zero(S);
    dist(start) = 1.0;
    double disc = 1.0;
    for (int t = 0; t < horizon && disc > 1e-18; ++t) {
      out.v(start) += disc * expected_r(dist);
      dist = step_dist(dist);
      disc *= gamma;
    }
  }
  Vector dist = mdp.mu();
  double disc = 1.0;
  for (int t = 0; t < horizon && disc > 1e-18; ++t) {
    out.visitation += (1.0 - gamma) * disc * dist;
    dist = step_dist(dist);
    disc *= gamma;
  }
  return out;
}

// Best deterministic policy value by enumeration of all |A|^|S| policies.
inline Vector brute_force_v_star(const TabularMdp& mdp) {
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  long total = 1;
  for (int s = 0; s < S; ++s) total *= A;
  Vector best = Vector::Constant(S, -1.0);
  for (long code = 0; code < total; ++code) {
    Matrix p = Matrix::Zero(S, A);
    long c = code;
    for (int s = 0; s < S; ++s) {
      p(s, static_cast<int>(c % A)) = 1.0;
      c /= A;
    }
    const Vector v = rollout(mdp, Policy(p)).v;
    best = best.cwiseMax(v);
  }
  return best;
}

// Nonzero entries, rows scaled off the unit sphere.
inline Matrix random_free(std::uint64_t seed, int S, int A) {
  Rng rng(seed);
  Matrix theta(S, A);
  for (int s = 0; s < S; ++s) {
    const double scale = 0.5 + 2.0 * rng.uniform();
    for (int a = 0; a < A; ++a) {
      double x = 0.0;
      while (std::abs(x) < 0.05) x = 2.0 * rng.uniform() - 1.0;
      theta(s, a) = scale * x;
    }
  }
  return theta;
}

// L_k(theta) with d^k, A^k and the row norms of theta^k frozen.
inline double surrogate(const TabularMdp& mdp, const Matrix& theta, const Vector& frozen_sq_norm,
                        const ValueBundle& vb) {
  double total = 0.0;
  for (int s = 0; s < theta.rows(); ++s) {
    const double n2 = theta.row(s).squaredNorm();
    double inner = 0.0;
    for (int a = 0; a < theta.cols(); ++a) inner += theta(s, a) * theta(s, a) / n2 * vb.adv(s, a);
    total += vb.visitation(s) * frozen_sq_norm(s) * inner;
  }
  return total / (1.0 - mdp.gamma());
}

inline Matrix central_difference(const TabularMdp& mdp, const Matrix& theta, const ValueBundle& vb,
                                 double h) {
  const Vector frozen = theta.rowwise().squaredNorm();
  Matrix fd(theta.rows(), theta.cols());
  for (int s = 0; s < theta.rows(); ++s) {
    for (int a = 0; a < theta.cols(); ++a) {
      Matrix up = theta;
      Matrix dn = theta;
      up(s, a) += h;
      dn(s, a) -= h;
      fd(s, a) = (surrogate(mdp, up, frozen, vb) - surrogate(mdp, dn, frozen, vb)) / (2.0 * h);
    }
  }
  return fd;
}

}  // namespace hpg::test
