#include "hpg/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hpg::io {

using nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw Error(ErrorCode::IoFailure, "malformed number in trace: '" + s + "'");
  }
  return x;
}

json optional_number(const std::optional<double>& x) {
  if (!x || !std::isfinite(*x)) return nullptr;
  return *x;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

TabularMdp parse_mdp_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoFailure, std::string("MDP document is not valid JSON: ") + e.what());
  }
  RawMdp raw;
  try {
    raw.num_states = doc.at("num_states").get<int>();
    raw.num_actions = doc.at("num_actions").get<int>();
    raw.gamma = doc.at("gamma").get<double>();
    raw.mu = doc.at("mu").get<std::vector<double>>();
    raw.transition = doc.at("transition").get<std::vector<std::vector<std::vector<double>>>>();
    raw.reward = doc.at("reward").get<std::vector<std::vector<std::vector<double>>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::DimensionMismatch, std::string("malformed MDP document: ") + e.what());
  }
  return validate_mdp(raw);
}

std::string mdp_to_json(const TabularMdp& mdp) {
  const RawMdp raw = mdp.to_raw();
  json doc;
  doc["num_states"] = raw.num_states;
  doc["num_actions"] = raw.num_actions;
  doc["gamma"] = raw.gamma;
  doc["mu"] = raw.mu;
  doc["transition"] = raw.transition;
  doc["reward"] = raw.reward;
  return doc.dump(2) + "\n";
}

TabularMdp load_mdp(const std::string& path) { return parse_mdp_json(read_file(path)); }

void save_mdp(const std::string& path, const TabularMdp& mdp) { write_file(path, mdp_to_json(mdp)); }

std::string trace_to_csv(const RunTrace& trace) {
  std::ostringstream os;
  const int S = trace.num_states();
  const int A = trace.records.empty() ? 0 : trace.records.front().policy.num_actions();
  os << "k,v_mu,delta_k";
  for (const char* prefix : {"b_", "grad_norm_", "v_", "d_", "sq_adv_"}) {
    for (int s = 0; s < S; ++s) os << ',' << prefix << s;
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) os << ",pi_" << s << '_' << a;
  }
  os << '\n';
  for (const auto& rec : trace.records) {
    os << rec.k << ',' << format_double(rec.v_mu) << ',' << format_double(rec.delta);
    for (const Vector* col : {&rec.b, &rec.grad_norm, &rec.v, &rec.visitation, &rec.expected_sq_adv}) {
      for (int s = 0; s < S; ++s) os << ',' << format_double((*col)(s));
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) os << ',' << format_double(rec.policy(s, a));
    }
    os << '\n';
  }
  return os.str();
}

RunTrace trace_from_csv(const std::string& text, int num_actions, double gamma,
                        std::optional<double> kappa, double eta) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoFailure, "trace file is empty");
  const auto header = split(line, ',');
  int S = 0;
  for (const auto& h : header) {
    if (h.rfind("b_", 0) == 0) ++S;
  }
  const std::size_t expected = 3 + 5 * static_cast<std::size_t>(S) +
                               static_cast<std::size_t>(S) * static_cast<std::size_t>(num_actions);
  if (S == 0 || header.size() != expected || header[0] != "k") {
    throw Error(ErrorCode::IoFailure, "trace header does not match the MDP dimensions");
  }

  RunTrace trace;
  trace.gamma = gamma;
  trace.kappa = kappa;
  trace.eta = eta;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != expected) throw Error(ErrorCode::IoFailure, "trace row has wrong width");
    std::size_t i = 0;
    const int k = static_cast<int>(parse_double(cells[i++]));
    const double v_mu = parse_double(cells[i++]);
    const double delta = parse_double(cells[i++]);
    auto column = [&]() {
      Vector v(S);
      for (int s = 0; s < S; ++s) v(s) = parse_double(cells[i++]);
      return v;
    };
    Vector b = column();
    Vector grad = column();
    Vector v = column();
    Vector d = column();
    Vector sq = column();
    Matrix probs(S, num_actions);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < num_actions; ++a) probs(s, a) = parse_double(cells[i++]);
    }
    trace.records.push_back(IterationRecord{.k = k,
                                            .policy = Policy(std::move(probs)),
                                            .v_mu = v_mu,
                                            .delta = delta,
                                            .v = std::move(v),
                                            .visitation = std::move(d),
                                            .b = std::move(b),
                                            .grad_norm = std::move(grad),
                                            .expected_sq_adv = std::move(sq)});
  }
  if (trace.records.empty()) throw Error(ErrorCode::IoFailure, "trace has no rows");
  trace.v_star_mu = trace.records.front().v_mu + trace.records.front().delta;
  return trace;
}

std::string trace_to_json(const RunTrace& trace) {
  json doc;
  doc["gamma"] = trace.gamma;
  doc["kappa"] = optional_number(trace.kappa);
  doc["eta"] = trace.eta;
  doc["v_star_mu"] = trace.v_star_mu;
  json records = json::array();
  for (const auto& rec : trace.records) {
    json r;
    r["k"] = rec.k;
    r["v_mu"] = rec.v_mu;
    r["delta_k"] = rec.delta;
    r["b"] = vector_json(rec.b);
    r["grad_norm"] = vector_json(rec.grad_norm);
    r["v"] = vector_json(rec.v);
    r["visitation"] = vector_json(rec.visitation);
    r["sq_adv"] = vector_json(rec.expected_sq_adv);
    json pi = json::array();
    for (int s = 0; s < rec.policy.num_states(); ++s) {
      pi.push_back(vector_json(rec.policy.probs().row(s).transpose()));
    }
    r["policy"] = std::move(pi);
    records.push_back(std::move(r));
  }
  doc["records"] = std::move(records);
  return doc.dump(2) + "\n";
}

std::string audit_to_json(const AuditReport& report) {
  const TheoremConstants& c = report.constants;
  json consts;
  consts["kappa"] = c.kappa;
  consts["gamma"] = c.gamma;
  consts["mu_tilde"] = c.mu_tilde;
  consts["lambda_hat"] = c.lambda_hat;
  consts["g_value"] = c.g_value;
  consts["g_statement_form"] = c.g_statement_form;
  consts["improvement_coef"] = c.improvement_coef;
  consts["m1"] = optional_number(c.m1);
  consts["k0"] = optional_number(c.k0);
  consts["rho_scale"] = optional_number(c.rho_scale);
  consts["rho"] = optional_number(c.rho);
  consts["c_local"] = optional_number(c.c_local);
  consts["c_global"] = c.c_global;

  json checks = json::array();
  for (const auto& chk : report.checks) {
    json j;
    j["name"] = chk.name;
    j["status"] = to_string(chk.status);
    j["tolerance"] = chk.tolerance;
    j["worst_violation"] = optional_number(chk.worst_violation);
    j["at_iteration"] = chk.at_iteration ? json(*chk.at_iteration) : json(nullptr);
    if (!chk.note.empty()) j["note"] = chk.note;
    checks.push_back(std::move(j));
  }
  json doc;
  doc["constants"] = std::move(consts);
  doc["checks"] = std::move(checks);
  doc["all_passed"] = report.all_passed();
  return doc.dump(2) + "\n";
}

}  // namespace hpg::io
