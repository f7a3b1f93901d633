#include "hpg/bench.hpp"

#include "hpg/hadamard.hpp"
#include "hpg/io.hpp"
#include "hpg/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace hpg {

namespace {

constexpr const char* kHadamard = "hadamard_pg";
constexpr const char* kSoftmaxPg = "softmax_pg";
constexpr const char* kSoftmaxNpg = "softmax_npg";

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

std::string instance_prefix(const ExperimentSpec& spec, int i) {
  if (spec.instances == 1) return spec.out;
  return spec.out + "-" + std::to_string(i);
}

TabularMdp instance_mdp(const ExperimentSpec& spec, int i) {
  if (spec.mdp_file) return io::load_mdp(*spec.mdp_file);
  return generate_random_mdp(spec.seed + static_cast<std::uint64_t>(i), spec.num_states,
                             spec.num_actions, spec.gamma);
}

AuditReport audit_trace(const RunTrace& trace, const TabularMdp& mdp, const OptimalBundle& opt,
                        double kappa, double tol) {
  const TheoremConstants consts = compute_constants(mdp, opt, kappa, estimate_lambda(trace));
  return audit(trace, mdp, opt, consts, tol);
}

ExperimentResult run_mdp(const ExperimentSpec& spec) {
  ExperimentResult result;
  for (int i = 0; i < spec.instances; ++i) {
    const TabularMdp mdp = instance_mdp(spec, i);
    const OptimalBundle opt = solve_optimal(mdp);
    const StepConfig cfg = StepConfig::from_kappa(*spec.kappa, mdp.gamma(), spec.iterations);
    const RunTrace trace =
        run(mdp, SphereParams::uniform(mdp.num_states(), mdp.num_actions()), cfg, opt);
    AuditReport report = audit_trace(trace, mdp, opt, *spec.kappa, spec.audit_tol);

    const std::string prefix = instance_prefix(spec, i);
    const std::string mdp_path = prefix + ".mdp.json";
    const std::string trace_path =
        prefix + (spec.format == OutputFormat::Csv ? ".trace.csv" : ".trace.json");
    const std::string audit_path = prefix + ".audit.json";
    io::save_mdp(mdp_path, mdp);
    io::write_file(trace_path, spec.format == OutputFormat::Csv ? io::trace_to_csv(trace)
                                                                : io::trace_to_json(trace));
    io::write_file(audit_path, io::audit_to_json(report));
    result.files.insert(result.files.end(), {mdp_path, trace_path, audit_path});
    result.audits_passed = result.audits_passed && report.all_passed();
    result.reports.push_back(std::move(report));
  }
  return result;
}

ExperimentResult run_audit(const ExperimentSpec& spec) {
  const TabularMdp mdp = instance_mdp(spec, 0);
  const OptimalBundle opt = solve_optimal(mdp);
  const StepConfig cfg = StepConfig::from_kappa(*spec.kappa, mdp.gamma(), 0);
  const RunTrace trace = io::trace_from_csv(io::read_file(*spec.trace_file), mdp.num_actions(),
                                            mdp.gamma(), cfg.kappa, cfg.eta);
  if (trace.num_states() != mdp.num_states()) {
    throw Error(ErrorCode::InvalidSpec, "trace and MDP disagree on the number of states");
  }
  ExperimentResult result;
  AuditReport report = audit_trace(trace, mdp, opt, *spec.kappa, spec.audit_tol);
  io::write_file(spec.out, io::audit_to_json(report));
  result.files.push_back(spec.out);
  result.audits_passed = report.all_passed();
  result.reports.push_back(std::move(report));
  return result;
}

ExperimentResult run_mab(const ExperimentSpec& spec) {
  const MabComparison cmp =
      mab_compare(spec.seed, spec.arms, *spec.eta, spec.iterations, spec.instances);
  io::write_file(spec.out, spec.format == OutputFormat::Csv ? mab_to_csv(cmp) : mab_to_json(cmp));
  ExperimentResult result;
  result.files.push_back(spec.out);
  return result;
}

void summarize(const std::vector<std::vector<double>>& logs, MabCurve& curve) {
  const std::size_t steps = logs.front().size();
  const double n = static_cast<double>(logs.size());
  curve.mean_log10_err.assign(steps, 0.0);
  curve.std_log10_err.assign(steps, 0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    double mean = 0.0;
    for (const auto& run : logs) mean += run[k];
    mean /= n;
    double var = 0.0;
    for (const auto& run : logs) var += (run[k] - mean) * (run[k] - mean);
    curve.mean_log10_err[k] = mean;
    curve.std_log10_err[k] = std::sqrt(var / n);
  }
}

double log_error(const Vector& pi, const MabInstance& inst) {
  return std::log10(std::max(mab_value_error(pi, inst), kMabErrorFloor));
}

}  // namespace

TabularMdp generate_random_mdp(std::uint64_t seed, int num_states, int num_actions, double gamma) {
  require(num_states >= 1 && num_actions >= 1, "dimensions must be at least 1");
  Rng rng(seed);
  RawMdp raw;
  raw.num_states = num_states;
  raw.num_actions = num_actions;
  raw.gamma = gamma;
  raw.mu.assign(num_states, 1.0 / num_states);
  raw.transition.assign(num_states, std::vector<std::vector<double>>(num_actions));
  raw.reward.assign(num_states, std::vector<std::vector<double>>(num_actions));
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      auto& row = raw.transition[s][a];
      double total = 0.0;
      for (int n = 0; n < num_states; ++n) {
        row.push_back(rng.uniform_positive());
        total += row.back();
      }
      for (double& p : row) p /= total;
    }
  }
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      for (int n = 0; n < num_states; ++n) raw.reward[s][a].push_back(rng.uniform());
    }
  }
  return validate_mdp(raw);
}

MabInstance generate_random_mab(std::uint64_t seed, int k_arms) {
  require(k_arms >= 1, "a bandit needs at least one arm");
  Rng rng(seed);
  Vector r(k_arms);
  for (int a = 0; a < k_arms; ++a) r(a) = rng.uniform();
  return MabInstance(std::move(r));
}

void validate_spec(const ExperimentSpec& spec) {
  require(spec.iterations >= 0, "--iters must be nonnegative");
  require(spec.instances >= 1, "--instances must be at least 1");
  require(!spec.out.empty(), "--out is required");
  require(spec.audit_tol > 0.0, "audit tolerance must be positive");
  switch (spec.mode) {
    case Mode::MdpRun:
    case Mode::Audit:
      require(spec.kappa.has_value(), "--kappa is required for run and audit");
      require(*spec.kappa > 0.0 && *spec.kappa < 1.0, "--kappa must lie in (0,1)");
      if (!spec.mdp_file) {
        require(spec.num_states >= 1 && spec.num_actions >= 1, "--states/--actions must be >= 1");
        require(spec.gamma >= 0.0 && spec.gamma < 1.0, "--gamma must lie in [0,1)");
      }
      if (spec.mode == Mode::Audit) {
        require(spec.trace_file.has_value(), "--trace is required for audit");
      }
      break;
    case Mode::MabCompare:
      require(spec.eta.has_value() && *spec.eta > 0.0, "--eta must be given and positive");
      require(spec.arms >= 1, "--arms must be at least 1");
      break;
  }
}

const MabCurve& MabComparison::curve(const std::string& method) const {
  for (const auto& c : curves) {
    if (c.method == method) return c;
  }
  throw Error(ErrorCode::InvalidSpec, "no curve for method " + method);
}

MabComparison mab_compare(std::uint64_t seed, int arms, double eta, int iterations, int instances) {
  require(arms >= 1 && instances >= 1 && iterations >= 0 && eta > 0.0, "invalid bandit comparison");
  MabComparison cmp{arms, eta, iterations, instances, {}};
  std::vector<std::vector<double>> had(instances), pg(instances), npg(instances);
  for (int i = 0; i < instances; ++i) {
    const MabInstance inst = generate_random_mab(seed + static_cast<std::uint64_t>(i), arms);
    Vector pi = Vector::Constant(arms, 1.0 / arms);
    SoftmaxParams pg_params = SoftmaxParams::zeros(1, arms);
    SoftmaxParams npg_params = SoftmaxParams::zeros(1, arms);
    for (int k = 0; k <= iterations; ++k) {
      had[i].push_back(log_error(pi, inst));
      pg[i].push_back(log_error(pg_params.policy().probs().row(0).transpose(), inst));
      npg[i].push_back(log_error(npg_params.policy().probs().row(0).transpose(), inst));
      if (k == iterations) break;
      pi = mab_hadamard_step(pi, inst, eta);
      pg_params = mab_softmax_pg_step(pg_params, inst, eta);
      npg_params = mab_softmax_npg_step(npg_params, inst, eta);
    }
  }
  for (auto [name, logs] : {std::pair{kHadamard, &had}, {kSoftmaxPg, &pg}, {kSoftmaxNpg, &npg}}) {
    MabCurve c;
    c.method = name;
    summarize(*logs, c);
    cmp.curves.push_back(std::move(c));
  }
  return cmp;
}

std::string mab_to_csv(const MabComparison& cmp) {
  std::ostringstream os;
  os << "k,method,mean_log10_err,std_log10_err\n";
  for (int k = 0; k <= cmp.iterations; ++k) {
    for (const auto& c : cmp.curves) {
      os << k << ',' << c.method << ',' << io::format_double(c.mean_log10_err[k]) << ','
         << io::format_double(c.std_log10_err[k]) << '\n';
    }
  }
  return os.str();
}

std::string mab_to_json(const MabComparison& cmp) {
  nlohmann::json doc;
  doc["arms"] = cmp.arms;
  doc["eta"] = cmp.eta;
  doc["iterations"] = cmp.iterations;
  doc["instances"] = cmp.instances;
  for (const auto& c : cmp.curves) {
    doc["methods"][c.method] = {{"mean_log10_err", c.mean_log10_err},
                                {"std_log10_err", c.std_log10_err}};
  }
  return doc.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  switch (spec.mode) {
    case Mode::MdpRun: return run_mdp(spec);
    case Mode::Audit: return run_audit(spec);
    case Mode::MabCompare: return run_mab(spec);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown mode");
}

}  // namespace hpg
