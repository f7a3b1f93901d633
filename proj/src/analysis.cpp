#include "hpg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hpg {

namespace {

// Tracks the largest lhs - rhs over the iterations of one check.
class Worst {
 public:
  void observe(double violation, int k) {
    if (!value_ || violation > *value_) {
      value_ = violation;
      at_ = k;
    }
  }

  CheckResult finish(const char* name, double tol, std::string note = {}) const {
    CheckResult r;
    r.name = name;
    r.tolerance = tol;
    r.note = std::move(note);
    if (!value_) {
      r.status = CheckStatus::Skipped;
      if (r.note.empty()) r.note = "no iterations to check";
      return r;
    }
    r.worst_violation = value_;
    r.at_iteration = at_;
    r.status = *value_ <= tol ? CheckStatus::Pass : CheckStatus::Fail;
    return r;
  }

 private:
  std::optional<double> value_;
  int at_ = -1;
};

CheckResult skipped(const char* name, double tol, std::string note) {
  CheckResult r;
  r.name = name;
  r.tolerance = tol;
  r.status = CheckStatus::Skipped;
  r.note = std::move(note);
  return r;
}

double ceil_k(double x) { return std::ceil(x - 1e-12); }

// Only valid once ceil_k(x) is known to lie inside the trace.
int ceil_index(double x) { return static_cast<int>(ceil_k(x)); }

}  // namespace

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "unknown";
}

TheoremConstants compute_constants(const TabularMdp& mdp, const OptimalBundle& opt, double kappa,
                                   double lambda_hat) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorCode::InvalidSpec, "kappa must lie in (0,1)");
  if (!(lambda_hat > 0.0 && lambda_hat <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "lambda_hat must lie in (0,1]");
  }
  TheoremConstants c;
  c.kappa = kappa;
  c.gamma = mdp.gamma();
  c.mu_tilde = mdp.mu_tilde();
  c.lambda_hat = lambda_hat;

  const double one_minus = 1.0 - c.gamma;
  const double denom = 4.0 + kappa * kappa;
  const double mu2 = c.mu_tilde * c.mu_tilde;
  c.g_value = 3.0 * kappa * mu2 * std::pow(one_minus, 4) * lambda_hat / denom;
  c.g_statement_form = 3.0 * kappa * mu2 * (1.0 - std::pow(c.gamma, 4)) * lambda_hat / denom;
  c.improvement_coef = 3.0 * kappa * mu2 * one_minus * one_minus / denom;
  c.c_global = (opt.v_star - opt.v_hat).maxCoeff() / one_minus;

  if (!opt.s_tilde.empty()) {
    double gap = std::numeric_limits<double>::infinity();
    for (int s : opt.s_tilde) gap = std::min(gap, opt.v_star(s) - opt.v_tilde(s));
    const double floor_sum = (opt.v_star + opt.v_hat).minCoeff();
    const double m1 =
        gap * (1.0 - kappa / 2.0 + kappa * one_minus * one_minus * c.mu_tilde / 4.0 * floor_sum);
    c.m1 = m1;
    c.k0 = 8.0 * c.gamma / (c.g_value * c.mu_tilde * m1);
    c.rho_scale = one_minus * one_minus * kappa * c.mu_tilde / denom * m1;
  }
  return c;
}

TheoremConstants bind_trace(TheoremConstants consts, const RunTrace& trace) {
  consts.rho.reset();
  consts.c_local.reset();
  if (!consts.k0 || !consts.rho_scale) return consts;
  if (!(ceil_k(*consts.k0) <= trace.last_iteration())) return consts;
  const int k0 = ceil_index(*consts.k0);
  const int half = ceil_index(*consts.k0 / 2.0);
  const double b_half = trace.records.at(half).b.maxCoeff();
  const double b_k0 = trace.records.at(k0).b.maxCoeff();
  consts.rho = *consts.rho_scale * (1.0 - b_half);
  consts.c_local = consts.c_global * b_k0;
  return consts;
}

double estimate_lambda(const RunTrace& trace) {
  if (trace.records.empty()) throw Error(ErrorCode::InvalidSpec, "trace is empty");
  double lambda = 1.0;
  for (const auto& rec : trace.records) lambda = std::min(lambda, 1.0 - rec.b.maxCoeff());
  return lambda;
}

bool AuditReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

const CheckResult& AuditReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::InvalidSpec, "no audit check named " + name);
}

AuditReport audit(const RunTrace& trace, const TabularMdp& mdp, const OptimalBundle& opt,
                  const TheoremConstants& consts, double tol) {
  const auto& recs = trace.records;
  if (recs.empty()) throw Error(ErrorCode::InvalidSpec, "trace is empty");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].k != static_cast<int>(i)) {
      throw Error(ErrorCode::InvalidSpec, "trace iterations are not contiguous from 0");
    }
  }

  AuditReport report;
  report.constants = bind_trace(consts, trace);
  const TheoremConstants& c = report.constants;
  const int n = static_cast<int>(recs.size());
  const double mu_tilde = mdp.mu_tilde();

  {
    Worst w;
    for (int k = 1; k < n; ++k) w.observe(recs[k - 1].v_mu - recs[k].v_mu, k);
    report.checks.push_back(w.finish(checks::kMonotone, tol));
  }
  {
    Worst w;
    for (int k = 1; k < n; ++k) {
      const double gain = recs[k].v_mu - recs[k - 1].v_mu;
      w.observe(c.improvement_coef * recs[k - 1].expected_sq_adv.sum() - gain, k - 1);
    }
    report.checks.push_back(w.finish(checks::kImprovementBound, tol));
  }
  {
    Worst w;
    const double cap = c.kappa * c.kappa / 4.0;
    for (int k = 0; k < n; ++k) {
      const double worst_norm = recs[k].grad_norm.maxCoeff();
      w.observe(trace.eta * trace.eta * worst_norm * worst_norm - cap, k);
    }
    report.checks.push_back(w.finish(checks::kStepCap, tol));
  }
  {
    Worst full;
    Worst half;
    for (int k = 1; k < n; ++k) {
      full.observe(recs[k].delta - 1.0 / (c.g_value * k), k);
      half.observe(recs[k].delta - 2.0 / (c.g_value * k), k);
    }
    report.checks.push_back(full.finish(checks::kSublinear, tol));
    report.checks.push_back(half.finish(checks::kSublinearHalfLambda, tol));
  }

  const bool linear_applicable = c.k0.has_value();
  const bool linear_bound = c.rho.has_value() && c.c_local.has_value();
  std::string linear_note;
  if (!linear_applicable) {
    linear_note = "not applicable: every action is optimal in every state";
  } else if (!linear_bound) {
    std::ostringstream os;
    os << "TraceTooShort: trace ends at k=" << trace.last_iteration() << " before ceil(k0)="
       << ceil_k(*c.k0);
    linear_note = os.str();
  }

  if (linear_bound) {
    const int k0 = ceil_index(*c.k0);
    const double base = 1.0 - *c.rho;
    Worst global;
    Worst local;
    for (int k = 0; k < n; ++k) {
      const double decay = std::pow(base, k - k0);
      global.observe(recs[k].delta - c.c_global * decay, k);
      if (k >= k0) local.observe(recs[k].delta - *c.c_local * decay, k);
    }
    report.checks.push_back(local.finish(checks::kLocalLinear, tol));
    report.checks.push_back(global.finish(checks::kGlobalLinear, tol));
  } else {
    report.checks.push_back(skipped(checks::kLocalLinear, tol, linear_note));
    report.checks.push_back(skipped(checks::kGlobalLinear, tol, linear_note));
  }

  {
    Worst w;
    for (int k = 0; k < n; ++k) {
      w.observe(recs[k].delta - c.c_global * recs[k].visitation.dot(recs[k].b), k);
    }
    report.checks.push_back(w.finish(checks::kValueErrorBound, tol));
  }

  if (linear_bound) {
    const int k0 = ceil_index(*c.k0);
    Worst w;
    for (int k = k0 + 1; k < n; ++k) {
      w.observe((recs[k].b - recs[k - 1].b).maxCoeff(), k);
    }
    report.checks.push_back(w.finish(checks::kBGapMonotone, tol));
  } else {
    report.checks.push_back(skipped(checks::kBGapMonotone, tol, linear_note));
  }

  {
    Worst w;
    for (int k = 0; k < n; ++k) {
      const double max_err = (opt.v_star - recs[k].v).maxCoeff();
      w.observe(max_err - recs[k].delta / mu_tilde, k);
    }
    report.checks.push_back(w.finish(checks::kMaxErrorBound, tol));
  }
  return report;
}

}  // namespace hpg
