#pragma once

// File formats: MDP documents (JSON), run traces (CSV or JSON) and audit
// reports (JSON). Doubles are written with 17 significant digits so every
// value reads back bit-identical.

#include "hpg/analysis.hpp"
#include "hpg/hadamard.hpp"
#include "hpg/mdp.hpp"

#include <string>

namespace hpg::io {

TabularMdp parse_mdp_json(const std::string& text);
std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp load_mdp(const std::string& path);
void save_mdp(const std::string& path, const TabularMdp& mdp);

/// Columns: k, v_mu, delta_k, b_<s>..., grad_norm_<s>..., v_<s>...,
/// d_<s>..., sq_adv_<s>..., pi_<s>_<a>...
std::string trace_to_csv(const RunTrace& trace);
/// Rebuilds a trace from CSV. The header fields (gamma, kappa, eta,
/// v_star_mu) are not part of the CSV and are supplied by the caller.
RunTrace trace_from_csv(const std::string& text, int num_actions, double gamma,
                        std::optional<double> kappa, double eta);
std::string trace_to_json(const RunTrace& trace);

std::string audit_to_json(const AuditReport& report);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

/// printf("%.17g") with non-finite values spelled as nan/inf/-inf.
std::string format_double(double x);

}  // namespace hpg::io
