// Acceptance suite. Prints one PASS/FAIL line per criterion; with an
// argument N only criterion N runs. Exit status is nonzero if any fails.

#include "hpg/analysis.hpp"
#include "hpg/baselines.hpp"
#include "hpg/bench.hpp"
#include "hpg/hadamard.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace hpg;

namespace {

constexpr int kInstances = 20;
constexpr int kStates = 4;
constexpr int kActions = 3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct Run {
  TabularMdp mdp;
  OptimalBundle opt;
  RunTrace trace;
};

Run sphere_run(std::uint64_t seed, double gamma, double kappa, int iters) {
  TabularMdp mdp = generate_random_mdp(seed, kStates, kActions, gamma);
  OptimalBundle opt = solve_optimal(mdp);
  RunTrace trace = run(mdp, SphereParams::uniform(kStates, kActions),
                       StepConfig::from_kappa(kappa, gamma, iters), opt);
  return {std::move(mdp), std::move(opt), std::move(trace)};
}

Outcome equivalence() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const TabularMdp mdp = generate_random_mdp(i, kStates, kActions, 0.9);
    const OptimalBundle opt = solve_optimal(mdp);
    const StepConfig cfg = StepConfig::from_kappa(0.5, 0.9, 500);
    const SphereParams init = SphereParams::uniform(kStates, kActions);
    const RunTrace a = run(mdp, init, cfg, opt);
    const RunTrace b = run_normalized(mdp, FreeParams::from_matrix(init.theta()), cfg, opt);
    for (std::size_t k = 0; k < a.records.size(); ++k) {
      worst = std::max(worst, (a.records[k].policy.probs() - b.records[k].policy.probs())
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          "max |pi1 - pi2| = " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome improvement() {
  const double kappa = 0.5;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kInstances; ++i) {
    const Run r = sphere_run(i, 0.9, kappa, 500);
    const double mu_t = r.mdp.mu_tilde();
    const double coef = 3.0 * kappa * mu_t * mu_t * 0.01 / (4.0 + kappa * kappa);
    const auto& recs = r.trace.records;
    for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
      // Sum over (s,a) of pi (A)^2, recomputed from a fresh evaluation.
      const ValueBundle vb = policy_evaluation(r.mdp, recs[k].policy);
      const double sq = recs[k].policy.probs().cwiseProduct(vb.adv.cwiseAbs2()).sum();
      worst = std::max(worst, coef * sq - (recs[k + 1].v_mu - recs[k].v_mu));
    }
  }
  return {worst <= 1e-10, "worst (bound - gain) = " + fmt("%.3g", worst)};
}

Outcome sublinear() {
  const double kappa = 0.5;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kInstances; ++i) {
    const Run r = sphere_run(i, 0.9, kappa, 500);
    const double lambda = estimate_lambda(r.trace);
    const double mu_t = r.mdp.mu_tilde();
    const double g = 3.0 * kappa * mu_t * mu_t * std::pow(0.1, 4) * lambda / (4.0 + kappa * kappa);
    for (const auto& rec : r.trace.records) {
      if (rec.k == 0) continue;
      worst = std::max(worst, rec.delta - 1.0 / (g * rec.k));
    }
  }
  return {worst <= 1e-8, "worst (delta_k - 1/(g k)) = " + fmt("%.3g", worst)};
}

Outcome global_linear() {
  const double kappa = 0.9;
  int applicable = 0;
  int failed = 0;
  double min_k0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kInstances; ++i) {
    const Run r = sphere_run(i, 0.8, kappa, 500);
    const AuditReport report =
        audit(r.trace, r.mdp, r.opt,
              compute_constants(r.mdp, r.opt, kappa, estimate_lambda(r.trace)), 1e-8);
    if (report.constants.k0) min_k0 = std::min(min_k0, *report.constants.k0);
    const CheckResult& c = report.check(checks::kGlobalLinear);
    if (c.status == CheckStatus::Skipped) continue;
    ++applicable;
    if (c.status == CheckStatus::Fail) ++failed;
  }
  std::ostringstream os;
  os << applicable << " of " << kInstances << " instances reach k0 <= 500 (need 5), " << failed
     << " failed; smallest k0 = " << fmt("%.3g", min_k0);
  return {applicable >= 5 && failed == 0, os.str()};
}

Outcome gradient() {
  double worst_rel = 0.0;
  double worst_tangent = 0.0;
  for (int i = 0; i < 50; ++i) {
    const TabularMdp mdp = generate_random_mdp(1000 + i, kStates, kActions, 0.9);
    const FreeParams free = FreeParams::from_matrix(test::random_free(2000 + i, kStates, kActions));
    const ValueBundle vb = policy_evaluation(mdp, free.policy());
    const Matrix analytic = normalized_gradient(mdp, free, vb);
    const Matrix fd = test::central_difference(mdp, free.theta(), vb, 1e-6);
    worst_rel = std::max(worst_rel, (fd - analytic).cwiseAbs().maxCoeff() /
                                        analytic.cwiseAbs().maxCoeff());

    SphereParams sphere = SphereParams::random(3000 + i, kStates, kActions);
    const StepConfig cfg = StepConfig::from_kappa(0.9, 0.9, 1);
    for (int k = 0; k < 20; ++k) {
      const ValueBundle svb = policy_evaluation(mdp, sphere.policy());
      const Matrix g = riemannian_gradient(mdp, sphere, svb);
      worst_tangent = std::max(
          worst_tangent, g.cwiseProduct(sphere.theta()).rowwise().sum().cwiseAbs().maxCoeff());
      sphere = hadamard_step(mdp, sphere, cfg, svb).params;
    }
  }
  return {worst_rel <= 1e-5 && worst_tangent <= 1e-12,
          "max relative FD error = " + fmt("%.3g", worst_rel) +
              ", max |<g_s, theta_s>| = " + fmt("%.3g", worst_tangent)};
}

Outcome structure() {
  const double kappa = 0.5;
  double norm_err = 0.0;
  double norm_drop = 0.0;
  double cap = -std::numeric_limits<double>::infinity();
  double recon = 0.0;
  double visit = -std::numeric_limits<double>::infinity();
  double pdl = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const TabularMdp mdp = generate_random_mdp(i, kStates, kActions, 0.9);
    const StepConfig cfg = StepConfig::from_kappa(kappa, 0.9, 1);
    SphereParams sphere = SphereParams::uniform(kStates, kActions);
    FreeParams free = FreeParams::from_matrix(sphere.theta());
    for (int k = 0; k < 500; ++k) {
      const Policy pi = sphere.policy();
      const ValueBundle vb = policy_evaluation(mdp, pi);
      const Vector gn = riemannian_gradient(mdp, sphere, vb).rowwise().norm();
      cap = std::max(cap, (cfg.eta * cfg.eta * gn.cwiseAbs2()).maxCoeff() - kappa * kappa / 4.0);
      for (int s = 0; s < kStates; ++s) {
        visit = std::max(visit, (1.0 - mdp.gamma()) * mdp.mu()(s) - vb.visitation(s));
      }
      const SphereStep step = hadamard_step(mdp, sphere, cfg, vb);
      norm_err = std::max(norm_err,
                          (step.params.theta().rowwise().norm().array() - 1.0).abs().maxCoeff());
      const Matrix delta = policy_delta(mdp, pi, vb, cfg);
      recon = std::max(recon,
                       (pi.probs() + delta - step.params.policy().probs()).cwiseAbs().maxCoeff());
      const double direct = policy_evaluation(mdp, step.params.policy()).v_mu - vb.v_mu;
      pdl = std::max(pdl, std::abs(performance_difference(mdp, step.params.policy(), pi,
                                                          mdp.mu()) -
                                   direct));

      const Vector before = free.row_norms();
      free = normalized_step(mdp, free, cfg).params;
      norm_drop = std::max(norm_drop, (before - free.row_norms()).maxCoeff());
      sphere = step.params;
    }
  }
  const bool ok = norm_err <= 1e-12 && norm_drop <= 0.0 && cap <= 1e-12 && recon <= 1e-10 &&
                  visit <= 1e-12 && pdl <= 1e-8;
  std::ostringstream os;
  os << "sphere norm err " << fmt("%.2g", norm_err) << ", norm drop " << fmt("%.2g", norm_drop)
     << ", cap excess " << fmt("%.2g", cap) << ", delta recon " << fmt("%.2g", recon)
     << ", visitation deficit " << fmt("%.2g", visit) << ", PDL err " << fmt("%.2g", pdl);
  return {ok, os.str()};
}

Outcome bandit() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream os;
  for (int k_arms : {2, 5, 20, 50}) {
    const MabComparison cmp = mab_compare(0, k_arms, 0.4, 1000, 10);
    const double had = cmp.curve("hadamard_pg").mean_log10_err.back();
    const double pg = cmp.curve("softmax_pg").mean_log10_err.back();
    const double npg = cmp.curve("softmax_npg").mean_log10_err.back();
    ok = ok && had < pg;
    os << "K=" << k_arms << " had " << fmt("%.1f", had) << " pg " << fmt("%.1f", pg) << " npg "
       << fmt("%.1f", npg) << "; ";
  }
  const double secs = seconds_since(t0);
  os << fmt("%.2f", secs) << " s";
  return {ok && secs < 30.0, os.str()};
}

Outcome convergence() {
  const double kappa = 0.9;
  int reached = 0;
  int slowest = 0;
  for (int i = 0; i < kInstances; ++i) {
    const TabularMdp mdp = generate_random_mdp(i, kStates, kActions, 0.8);
    const OptimalBundle opt = solve_optimal(mdp);
    const double v_star = mdp.mu().dot(opt.v_star);
    const StepConfig cfg = StepConfig::from_kappa(kappa, 0.8, 1);
    SphereParams sphere = SphereParams::uniform(kStates, kActions);
    for (int k = 0; k <= 50000; ++k) {
      const ValueBundle vb = policy_evaluation(mdp, sphere.policy());
      if (v_star - vb.v_mu <= 1e-6) {
        ++reached;
        slowest = std::max(slowest, k);
        break;
      }
      sphere = hadamard_step(mdp, sphere, cfg, vb).params;
    }
  }
  std::ostringstream os;
  os << reached << " of " << kInstances << " reach delta <= 1e-6; slowest at k = " << slowest;
  return {reached == kInstances, os.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "algorithm equivalence", equivalence},
      {2, "monotone improvement bound", improvement},
      {3, "sublinear rate", sublinear},
      {4, "global linear rate", global_linear},
      {5, "gradient correctness", gradient},
      {6, "structural identities", structure},
      {7, "bandit reproduction", bandit},
      {8, "global convergence", convergence},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool ok = true;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("AC%d %s: %s (%s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
