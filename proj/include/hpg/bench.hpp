#pragma once

// Instance generators and experiment orchestration behind the CLI.

#include "hpg/analysis.hpp"
#include "hpg/baselines.hpp"
#include "hpg/mdp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hpg {

/// Transition rows are normalized (0,1] variates, rewards uniform on [0,1),
/// mu uniform. Deterministic in seed on every platform.
TabularMdp generate_random_mdp(std::uint64_t seed, int num_states, int num_actions, double gamma);

MabInstance generate_random_mab(std::uint64_t seed, int k_arms);

enum class Mode { MdpRun, MabCompare, Audit };
enum class OutputFormat { Csv, Json };

struct ExperimentSpec {
  Mode mode = Mode::MdpRun;
  std::uint64_t seed = 0;
  int num_states = 4;
  int num_actions = 3;
  int arms = 2;
  double gamma = 0.9;
  std::optional<double> kappa;
  std::optional<double> eta;
  int iterations = 500;
  int instances = 1;
  std::string out;
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::string> mdp_file;
  std::optional<std::string> trace_file;
  double audit_tol = 1e-8;
};

/// Throws Error(InvalidSpec) describing the first bad field.
void validate_spec(const ExperimentSpec& spec);

struct MabCurve {
  std::string method;
  std::vector<double> mean_log10_err;  // index k = 0..iterations
  std::vector<double> std_log10_err;   // population standard deviation
};

struct MabComparison {
  int arms = 0;
  double eta = 0.0;
  int iterations = 0;
  int instances = 0;
  std::vector<MabCurve> curves;  // hadamard_pg, softmax_pg, softmax_npg

  const MabCurve& curve(const std::string& method) const;
};

/// Errors below this are clamped before taking log10.
inline constexpr double kMabErrorFloor = 1e-300;

/// Instance i uses seed + i; all methods start from the uniform policy.
MabComparison mab_compare(std::uint64_t seed, int arms, double eta, int iterations, int instances);

std::string mab_to_csv(const MabComparison& cmp);
std::string mab_to_json(const MabComparison& cmp);

struct ExperimentResult {
  std::vector<std::string> files;
  bool audits_passed = true;
  std::vector<AuditReport> reports;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace hpg
