#include "hpg/baselines.hpp"

#include <cmath>

namespace hpg {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidSpec, "eta must be positive");
}

void check_mab_policy(const Vector& pi, const MabInstance& inst) {
  if (pi.size() != inst.num_arms()) {
    throw Error(ErrorCode::DimensionMismatch, "policy length differs from the number of arms");
  }
}

}  // namespace

SoftmaxParams::SoftmaxParams(Matrix logits) : logits_(std::move(logits)) {
  if (logits_.rows() < 1 || logits_.cols() < 1 || !logits_.allFinite()) {
    throw Error(ErrorCode::InvalidParams, "logits must be finite and non-empty");
  }
  logits_ = logits_.colwise() - logits_.rowwise().maxCoeff();
}

SoftmaxParams SoftmaxParams::zeros(int num_states, int num_actions) {
  return SoftmaxParams(Matrix::Zero(num_states, num_actions));
}

Policy SoftmaxParams::policy() const {
  Matrix e = logits_.array().exp().matrix();
  const Vector z = e.rowwise().sum();
  return Policy(z.cwiseInverse().asDiagonal() * e);
}

SoftmaxParams softmax_pg_step(const TabularMdp& mdp, const SoftmaxParams& params, double eta) {
  check_eta(eta);
  const Policy pi = params.policy();
  const ValueBundle vb = policy_evaluation(mdp, pi);
  const Vector scale = (eta / (1.0 - mdp.gamma())) * vb.visitation;
  return SoftmaxParams(params.logits() + scale.asDiagonal() * pi.probs().cwiseProduct(vb.adv));
}

SoftmaxParams softmax_npg_step(const SoftmaxParams& params, const Matrix& adv, double eta) {
  check_eta(eta);
  if (adv.rows() != params.logits().rows() || adv.cols() != params.logits().cols()) {
    throw Error(ErrorCode::DimensionMismatch, "advantage shape differs from logits");
  }
  return SoftmaxParams(params.logits() + eta * adv);
}

MabInstance::MabInstance(Vector rewards) : rewards_(std::move(rewards)) {
  if (rewards_.size() < 1) throw Error(ErrorCode::InvalidSpec, "bandit needs at least one arm");
  if (!((rewards_.array() >= 0.0) && (rewards_.array() <= 1.0)).all()) {
    throw Error(ErrorCode::RewardOutOfRange, "bandit rewards must lie in [0,1]");
  }
}

Vector mab_advantage(const Vector& pi, const MabInstance& inst) {
  check_mab_policy(pi, inst);
  return inst.rewards().array() - pi.dot(inst.rewards());
}

double mab_value_error(const Vector& pi, const MabInstance& inst) {
  check_mab_policy(pi, inst);
  const double best = inst.best_reward();
  double err = 0.0;
  for (int a = 0; a < inst.num_arms(); ++a) err += pi(a) * (best - inst.rewards()(a));
  return err;
}

Vector mab_hadamard_step(const Vector& pi, const MabInstance& inst, double eta) {
  check_eta(eta);
  const Vector adv = mab_advantage(pi, inst);
  const double denom = 1.0 + 4.0 * eta * eta * pi.dot(adv.cwiseAbs2());
  return pi.cwiseProduct(((2.0 * eta) * adv.array() + 1.0).square().matrix()) / denom;
}

SoftmaxParams mab_softmax_pg_step(const SoftmaxParams& params, const MabInstance& inst,
                                  double eta) {
  check_eta(eta);
  const Vector pi = params.policy().probs().row(0).transpose();
  const Vector adv = mab_advantage(pi, inst);
  return SoftmaxParams(params.logits() + eta * pi.cwiseProduct(adv).transpose());
}

SoftmaxParams mab_softmax_npg_step(const SoftmaxParams& params, const MabInstance& inst,
                                   double eta) {
  check_eta(eta);
  const Vector pi = params.policy().probs().row(0).transpose();
  return SoftmaxParams(params.logits() + eta * mab_advantage(pi, inst).transpose());
}

TabularMdp mab_as_mdp(const MabInstance& inst) {
  RawMdp raw;
  raw.num_states = 1;
  raw.num_actions = inst.num_arms();
  raw.gamma = 0.0;
  raw.mu = {1.0};
  raw.transition.assign(1, std::vector<std::vector<double>>(inst.num_arms(), {1.0}));
  raw.reward.assign(1, {});
  for (int a = 0; a < inst.num_arms(); ++a) raw.reward[0].push_back({inst.rewards()(a)});
  return validate_mdp(raw);
}

}  // namespace hpg
