#include "hpg/hadamard.hpp"

#include "hpg/rng.hpp"

#include <cmath>
#include <sstream>

namespace hpg {

namespace {

constexpr double kSphereTol = 1e-12;

Policy squared_policy(const Matrix& theta) {
  Matrix sq = theta.array().square().matrix();
  const Vector norms = sq.rowwise().sum();
  return Policy(norms.asDiagonal().inverse() * sq);
}

void check_shape(const TabularMdp& mdp, const Matrix& theta) {
  if (theta.rows() != mdp.num_states() || theta.cols() != mdp.num_actions()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter shape does not match the MDP");
  }
}

// Per-state factor 2 eta d(s) / (1-gamma).
Vector step_scale(const TabularMdp& mdp, const ValueBundle& vb, double eta) {
  return (2.0 * eta / (1.0 - mdp.gamma())) * vb.visitation;
}

Vector expected_sq_advantage(const Policy& pi, const ValueBundle& vb) {
  return pi.probs().cwiseProduct(vb.adv.cwiseAbs2()).rowwise().sum();
}

IterationRecord make_record(int k, Policy pi, const ValueBundle& vb, Vector grad_norm,
                            const OptimalBundle& opt, const TabularMdp& mdp) {
  Vector b = b_gap(pi, opt);
  Vector esq = expected_sq_advantage(pi, vb);
  return IterationRecord{.k = k,
                         .policy = std::move(pi),
                         .v_mu = vb.v_mu,
                         .delta = mdp.mu().dot(opt.v_star) - vb.v_mu,
                         .v = vb.v,
                         .visitation = vb.visitation,
                         .b = std::move(b),
                         .grad_norm = std::move(grad_norm),
                         .expected_sq_adv = std::move(esq)};
}

RunTrace empty_trace(const TabularMdp& mdp, const StepConfig& cfg, const OptimalBundle& opt) {
  RunTrace trace;
  trace.gamma = mdp.gamma();
  trace.kappa = cfg.kappa;
  trace.eta = cfg.eta;
  trace.v_star_mu = mdp.mu().dot(opt.v_star);
  trace.records.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
  return trace;
}

void check_config(const StepConfig& cfg) {
  if (!(cfg.eta > 0.0) || cfg.max_iters < 0) {
    throw Error(ErrorCode::InvalidSpec, "step size must be positive and max_iters nonnegative");
  }
}

}  // namespace

StepConfig StepConfig::from_kappa(double kappa, double gamma, int max_iters) {
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "kappa must lie in (0,1)");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::BadDiscount, "gamma must lie in [0,1)");
  }
  if (max_iters < 0) throw Error(ErrorCode::InvalidSpec, "max_iters must be nonnegative");
  return StepConfig{kappa, (1.0 - gamma) * (1.0 - gamma) * kappa / 4.0, max_iters};
}

StepConfig StepConfig::from_eta(double eta, int max_iters) {
  StepConfig cfg{std::nullopt, eta, max_iters};
  check_config(cfg);
  return cfg;
}

SphereParams SphereParams::from_matrix(Matrix theta) {
  if (theta.rows() < 1 || theta.cols() < 1 || !theta.allFinite()) {
    throw Error(ErrorCode::InvalidParams, "sphere parameters must be finite and non-empty");
  }
  for (Eigen::Index s = 0; s < theta.rows(); ++s) {
    if (std::abs(theta.row(s).norm() - 1.0) > kSphereTol) {
      std::ostringstream os;
      os << "row " << s << " is not on the unit sphere";
      throw Error(ErrorCode::InvalidParams, os.str());
    }
    if ((theta.row(s).array() == 0.0).any()) {
      throw Error(ErrorCode::ZeroParameter, "sphere parameters must be nonzero entrywise");
    }
  }
  return SphereParams(std::move(theta));
}

SphereParams SphereParams::uniform(int num_states, int num_actions) {
  return SphereParams(Matrix::Constant(num_states, num_actions, 1.0 / std::sqrt(num_actions)));
}

SphereParams SphereParams::random(std::uint64_t seed, int num_states, int num_actions) {
  Rng rng(seed);
  Matrix theta(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      double x = 0.0;
      // Keep entries away from zero so the induced policy is not near-degenerate.
      while (std::abs(x) < 0.05) x = 2.0 * rng.uniform() - 1.0;
      theta(s, a) = x;
    }
    theta.row(s).normalize();
  }
  return SphereParams(std::move(theta));
}

SphereParams SphereParams::from_policy(const Policy& pi) {
  if (!(pi.probs().array() > 0.0).all()) {
    throw Error(ErrorCode::ZeroParameter, "policy must be strictly positive");
  }
  Matrix theta = pi.probs().cwiseSqrt();
  theta.rowwise().normalize();
  return SphereParams(std::move(theta));
}

Policy SphereParams::policy() const { return squared_policy(theta_); }

FreeParams FreeParams::from_matrix(Matrix theta) {
  if (theta.rows() < 1 || theta.cols() < 1 || !theta.allFinite()) {
    throw Error(ErrorCode::InvalidParams, "parameters must be finite and non-empty");
  }
  for (Eigen::Index s = 0; s < theta.rows(); ++s) {
    if (theta.row(s).squaredNorm() == 0.0) {
      std::ostringstream os;
      os << "row " << s << " has zero norm";
      throw Error(ErrorCode::ZeroRow, os.str());
    }
  }
  return FreeParams(std::move(theta));
}

Policy FreeParams::policy() const { return squared_policy(theta_); }

Matrix riemannian_gradient(const TabularMdp& mdp, const SphereParams& params,
                           const ValueBundle& vb) {
  check_shape(mdp, params.theta());
  const Vector scale = (2.0 / (1.0 - mdp.gamma())) * vb.visitation;
  return scale.asDiagonal() * params.theta().cwiseProduct(vb.adv);
}

Matrix normalized_gradient(const TabularMdp& mdp, const FreeParams& params,
                           const ValueBundle& vb) {
  check_shape(mdp, params.theta());
  const Vector scale = (2.0 / (1.0 - mdp.gamma())) * vb.visitation;
  return scale.asDiagonal() * params.theta().cwiseProduct(vb.adv);
}

SphereStep hadamard_step(const TabularMdp& mdp, const SphereParams& params, const StepConfig& cfg) {
  return hadamard_step(mdp, params, cfg, policy_evaluation(mdp, params.policy()));
}

SphereStep hadamard_step(const TabularMdp& mdp, const SphereParams& params, const StepConfig& cfg,
                         const ValueBundle& vb) {
  check_config(cfg);
  const Matrix g = riemannian_gradient(mdp, params, vb);
  Matrix next = params.theta() + cfg.eta * g;
  next.rowwise().normalize();
  if ((next.array() == 0.0).any()) {
    throw Error(ErrorCode::ZeroParameter, "a parameter hit exactly zero; step size out of regime");
  }

  const Policy pi = params.policy();
  const Vector c = step_scale(mdp, vb, cfg.eta);
  const Vector denom = (c.cwiseAbs2().cwiseProduct(expected_sq_advantage(pi, vb))).array() + 1.0;
  Matrix factor = ((c.asDiagonal() * vb.adv).array() + 1.0).square().matrix();
  Matrix probs = pi.probs().cwiseProduct(factor);
  probs = denom.cwiseInverse().asDiagonal() * probs;

  return SphereStep{SphereParams::from_matrix(std::move(next)), Policy(std::move(probs))};
}

FreeStep normalized_step(const TabularMdp& mdp, const FreeParams& params, const StepConfig& cfg) {
  return normalized_step(mdp, params, cfg, policy_evaluation(mdp, params.policy()));
}

FreeStep normalized_step(const TabularMdp& mdp, const FreeParams& params, const StepConfig& cfg,
                         const ValueBundle& vb) {
  check_config(cfg);
  Matrix next = params.theta() + cfg.eta * normalized_gradient(mdp, params, vb);
  FreeParams out = FreeParams::from_matrix(std::move(next));
  Policy pi = out.policy();
  return FreeStep{std::move(out), std::move(pi)};
}

Matrix policy_delta(const TabularMdp& mdp, const Policy& pi, const ValueBundle& vb,
                    const StepConfig& cfg) {
  check_config(cfg);
  const Vector c = step_scale(mdp, vb, cfg.eta);
  const Vector esq = expected_sq_advantage(pi, vb);
  Matrix delta(pi.num_states(), pi.num_actions());
  for (int s = 0; s < pi.num_states(); ++s) {
    const double denom = 1.0 + c(s) * c(s) * esq(s);
    for (int a = 0; a < pi.num_actions(); ++a) {
      const double adv = vb.adv(s, a);
      const double inner = adv + 0.5 * c(s) * (adv * adv - esq(s));
      delta(s, a) = pi(s, a) / denom * 2.0 * c(s) * inner;
    }
  }
  return delta;
}

int RunTrace::num_states() const {
  return records.empty() ? 0 : static_cast<int>(records.front().b.size());
}

RunTrace run(const TabularMdp& mdp, const SphereParams& init, const StepConfig& cfg,
             const OptimalBundle& opt) {
  check_config(cfg);
  RunTrace trace = empty_trace(mdp, cfg, opt);
  SphereParams params = init;
  for (int k = 0; k <= cfg.max_iters; ++k) {
    Policy pi = params.policy();
    const ValueBundle vb = policy_evaluation(mdp, pi);
    const Matrix g = riemannian_gradient(mdp, params, vb);
    trace.records.push_back(make_record(k, std::move(pi), vb, g.rowwise().norm(), opt, mdp));
    if (k < cfg.max_iters) params = hadamard_step(mdp, params, cfg, vb).params;
  }
  return trace;
}

RunTrace run_normalized(const TabularMdp& mdp, const FreeParams& init, const StepConfig& cfg,
                        const OptimalBundle& opt) {
  check_config(cfg);
  RunTrace trace = empty_trace(mdp, cfg, opt);
  FreeParams params = init;
  for (int k = 0; k <= cfg.max_iters; ++k) {
    Policy pi = params.policy();
    const ValueBundle vb = policy_evaluation(mdp, pi);
    // Riemannian gradient of the equivalent sphere point theta_s / |theta_s|.
    const Matrix unit = params.row_norms().cwiseInverse().asDiagonal() * params.theta();
    const Vector scale = (2.0 / (1.0 - mdp.gamma())) * vb.visitation;
    const Matrix g = scale.asDiagonal() * unit.cwiseProduct(vb.adv);
    trace.records.push_back(make_record(k, std::move(pi), vb, g.rowwise().norm(), opt, mdp));
    if (k < cfg.max_iters) params = normalized_step(mdp, params, cfg, vb).params;
  }
  return trace;
}

}  // namespace hpg
