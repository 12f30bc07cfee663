#include "sonic/io.hpp"

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "sonic/solver.hpp"

namespace sonic {

namespace {

using json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw InvalidInput("config key '" + key + "': '" + text + "' is not a number");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw InvalidInput("config key '" + key + "': '" + text + "' is not an integer");
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  if (out.empty()) throw InvalidInput("config key '" + key + "' needs a comma-separated list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_real(v[i]);
  return out;
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const ExponentFit& f) {
  return {{"beta", real_or_null(f.beta)},
          {"amplitude", real_or_null(f.amplitude)},
          {"fit_quality", real_or_null(f.fit_quality)}};
}

json study_json(const RefinementStudy& s) {
  json ratios = json::array();
  for (double r : s.growth_ratios) ratios.push_back(real_or_null(r));
  json values = json::array();
  for (double v : s.values) values.push_back(real_or_null(v));
  return {{"levels", s.levels},
          {"values", values},
          {"growth_ratios", ratios},
          {"verdict", verdict_name(s.verdict)}};
}

json config_json(const ExperimentConfig& cfg) {
  json c = json::object();
  std::istringstream in(canonical_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    c[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return c;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw InvalidInput("config line " + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw InvalidInput("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }

  static const char* known[] = {"tau",        "boundary",   "rho_b",       "grid.n",
                                "grid.grading", "algorithm", "tol",         "max_iter",
                                "damping",    "b.kind",     "b.value",     "b.breaks",
                                "b.values",   "b.base",     "b.amplitude", "b.frequency",
                                "b.x",        "b.y",        "convergence.n0"};
  for (const auto& [key, value] : kv) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InvalidInput("unknown config key '" + key + "'");
  }
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto require = [&](const char* key, const std::string& kind) -> const std::string& {
    const std::string* v = get(key);
    if (!v) throw InvalidInput("b.kind = " + kind + " requires key '" + key + "'");
    return *v;
  };

  ExperimentConfig cfg;
  SolverConfig& s = cfg.solver;
  if (auto v = get("tau")) s.tau = parse_real("tau", *v);
  if (auto v = get("boundary")) {
    if (*v == "sonic") s.boundary = BoundaryMode::sonic;
    else if (*v == "subsonic") s.boundary = BoundaryMode::subsonic;
    else throw InvalidInput("boundary must be 'sonic' or 'subsonic', got '" + *v + "'");
  }
  if (auto v = get("rho_b")) s.rho_b = parse_real("rho_b", *v);
  if (s.boundary == BoundaryMode::subsonic && !get("rho_b"))
    throw InvalidInput("boundary = subsonic requires key 'rho_b'");

  Grid::Grading grading = Grid::Grading::endpoint_clustered;
  if (auto v = get("grid.grading")) {
    if (*v == "uniform") grading = Grid::Grading::uniform;
    else if (*v == "clustered") grading = Grid::Grading::endpoint_clustered;
    else throw InvalidInput("grid.grading must be 'uniform' or 'clustered', got '" + *v + "'");
  }
  long long n = 1024;
  if (auto v = get("grid.n")) n = parse_integer("grid.n", *v);
  if (n < 4) throw InvalidInput("grid.n must be at least 4 (got " + std::to_string(n) + ")");
  s.grid = Grid::make(grading, static_cast<std::size_t>(n));

  if (auto v = get("algorithm")) {
    if (*v == "picard-green") s.algorithm = Algorithm::picard_green;
    else if (*v == "newton") s.algorithm = Algorithm::newton;
    else throw InvalidInput("algorithm must be 'picard-green' or 'newton', got '" + *v + "'");
  }
  s.max_iter = default_max_iter(s.algorithm);
  if (auto v = get("max_iter")) s.max_iter = static_cast<int>(parse_integer("max_iter", *v));
  if (auto v = get("tol")) s.tol_residual = parse_real("tol", *v);
  if (auto v = get("damping")) s.damping = parse_real("damping", *v);

  const std::string kind = get("b.kind") ? *get("b.kind") : "constant";
  if (kind == "constant") {
    cfg.doping = DopingProfile::constant(get("b.value") ? parse_real("b.value", *get("b.value")) : 2.0);
  } else if (kind == "piecewise") {
    cfg.doping = DopingProfile::piecewise(parse_list("b.breaks", require("b.breaks", kind)),
                                          parse_list("b.values", require("b.values", kind)));
  } else if (kind == "sine") {
    cfg.doping = DopingProfile::sine(parse_real("b.base", require("b.base", kind)),
                                     parse_real("b.amplitude", require("b.amplitude", kind)),
                                     parse_real("b.frequency", require("b.frequency", kind)));
  } else if (kind == "tabulated") {
    cfg.doping = DopingProfile::tabulated(parse_list("b.x", require("b.x", kind)),
                                          parse_list("b.y", require("b.y", kind)));
  } else {
    throw InvalidInput("b.kind must be constant, piecewise, sine or tabulated, got '" + kind + "'");
  }

  if (auto v = get("convergence.n0")) {
    const long long n0 = parse_integer("convergence.n0", *v);
    if (n0 < 4) throw InvalidInput("convergence.n0 must be at least 4");
    cfg.convergence_n0 = static_cast<std::size_t>(n0);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  const SolverConfig& s = cfg.solver;
  const DopingProfile& b = cfg.doping;
  std::map<std::string, std::string> kv;
  kv["algorithm"] = algorithm_name(s.algorithm);
  kv["boundary"] = boundary_name(s.boundary);
  if (s.boundary == BoundaryMode::subsonic) kv["rho_b"] = format_real(s.rho_b);
  kv["convergence.n0"] = std::to_string(cfg.convergence_n0);
  kv["damping"] = format_real(s.damping);
  kv["grid.grading"] = Grid::grading_name(s.grid.grading());
  kv["grid.n"] = std::to_string(s.grid.n_cells());
  kv["max_iter"] = std::to_string(s.max_iter);
  kv["tau"] = format_real(s.tau);
  kv["tol"] = format_real(s.tol_residual);
  kv["b.kind"] = DopingProfile::kind_name(b.kind());
  switch (b.kind()) {
    case DopingProfile::Kind::constant:
      kv["b.value"] = format_real(b.base());
      break;
    case DopingProfile::Kind::piecewise_constant:
      kv["b.breaks"] = join(b.abscissae());
      kv["b.values"] = join(b.ordinates());
      break;
    case DopingProfile::Kind::sine_perturbed:
      kv["b.base"] = format_real(b.base());
      kv["b.amplitude"] = format_real(b.amplitude());
      kv["b.frequency"] = format_real(b.frequency());
      break;
    case DopingProfile::Kind::tabulated:
      kv["b.x"] = join(b.abscissae());
      kv["b.y"] = join(b.ordinates());
      break;
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string config_digest(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string solution_csv(const Solution& sol, const std::vector<double>& e_poisson) {
  std::string out = "x,rho,w,E_flux,E_poisson\n";
  for (std::size_t i = 0; i < sol.grid.size(); ++i) {
    out += format_real(sol.grid[i]) + ',' + format_real(sol.rho[i]) + ',' + format_real(sol.w[i]) +
           ',' + format_real(sol.E[i]) + ',' + format_real(e_poisson[i]) + '\n';
  }
  return out;
}

Solution parse_solution_csv(const std::string& text, Grid::Grading grading) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,rho,w,E_flux,E_poisson")
    throw InvalidInput("solution csv: expected header x,rho,w,E_flux,E_poisson");
  std::vector<double> x;
  Solution sol;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(parse_real("row " + std::to_string(row), cell));
    if (vals.size() != 5) throw InvalidInput("solution csv row " + std::to_string(row) + ": expected 5 columns");
    x.push_back(vals[0]);
    sol.rho.push_back(vals[1]);
    sol.w.push_back(vals[2]);
    sol.E.push_back(vals[3]);
  }
  sol.grid = Grid::from_nodes(std::move(x), grading);
  sol.converged = true;
  return sol;
}

std::string report_json(const ExperimentConfig& cfg, const Solution& sol) {
  const SolverConfig& s = cfg.solver;
  double rho_min = sol.rho.front(), rho_max = sol.rho.front();
  double w_min = sol.w.front(), w_max = sol.w.front();
  for (std::size_t i = 0; i < sol.rho.size(); ++i) {
    rho_min = std::min(rho_min, sol.rho[i]);
    rho_max = std::max(rho_max, sol.rho[i]);
    w_min = std::min(w_min, sol.w[i]);
    w_max = std::max(w_max, sol.w[i]);
  }
  const auto wr = weak_residual(sol, cfg.doping, s.tau, 8);
  json j;
  j["status"] = "converged";
  j["config"] = config_json(cfg);
  j["config_digest"] = config_digest(cfg);
  j["doping"] = cfg.doping.describe();
  j["iterations"] = sol.iterations;
  j["final_residual"] = sol.final_residual;
  j["converged"] = sol.converged;
  j["residual_history"] = sol.residual_history;
  j["rho_min"] = rho_min;
  j["rho_max"] = rho_max;
  j["w_min"] = w_min;
  j["w_max"] = w_max;
  j["weak_residual_max"] = wr.max_abs;
  j["e_field_mismatch"] = e_field_mismatch(sol, cfg.doping, s.tau);
  j["warnings"] = sol.warnings;
  return j.dump(2) + "\n";
}

std::string failure_report_json(const ExperimentConfig& cfg, const std::string& message,
                                const std::vector<double>& residual_history, int iterations) {
  json j;
  j["status"] = "not_converged";
  j["config"] = config_json(cfg);
  j["config_digest"] = config_digest(cfg);
  j["doping"] = cfg.doping.describe();
  j["iterations"] = iterations;
  j["converged"] = false;
  j["error"] = message;
  j["residual_history"] = residual_history;
  return j.dump(2) + "\n";
}

std::string regularity_json(const RegularityAnalysis& a, const AnalysisOptions& opts) {
  const RegularityReport& r = a.report;
  json j;
  const bool left = !opts.endpoint || *opts.endpoint == Endpoint::left;
  const bool right = !opts.endpoint || *opts.endpoint == Endpoint::right;
  if (right) {
    j["exponent_right"] = fit_json(r.exponent_right);
    j["slope_w_right"] = real_or_null(r.slope_w_right);
    j["sandwich"] = {{"C1", real_or_null(r.sandwich_c1)},
                     {"C2", real_or_null(r.sandwich_c2)},
                     {"ok", a.sandwich.ok}};
  }
  if (left) {
    j["exponent_left"] = fit_json(r.exponent_left);
    j["slope_w_left"] = real_or_null(r.slope_w_left);
  }
  j["barrier"] = {{"m_empirical", real_or_null(a.barrier.m_empirical)},
                  {"beta_empirical", real_or_null(a.barrier.beta_empirical)},
                  {"upper_ok", a.barrier.upper_ok}};
  json sob = json::array();
  for (const auto& row : r.sobolev_table)
    sob.push_back({{"p", row.p}, {"level", row.level}, {"value", real_or_null(row.value)}});
  j["sobolev_table"] = sob;
  json hol = json::array();
  for (const auto& row : r.holder_table)
    hol.push_back({{"nu", row.nu}, {"level", row.level}, {"value", real_or_null(row.value)}});
  j["holder_table"] = hol;
  json studies = json::object();
  for (const auto& s : a.studies) studies[s.name] = study_json(s.study);
  j["refinement_studies"] = studies;
  json verdicts = json::object();
  for (const auto& [name, ok] : r.verdicts) verdicts[name] = ok;
  j["verdicts"] = verdicts;
  json failures = json::object();
  for (const auto& [section, msg] : r.failures) failures[section] = msg;
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<TauSweepRow>& rows) {
  std::string out = "tau,slope_w_left,slope_w_right,beta_left,beta_right,converged,algorithm,error\n";
  for (const auto& r : rows) {
    std::string err = r.error.empty() ? r.note : r.error;
    for (char& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    out += format_real(r.tau) + ',' + format_real(r.slope_w_left) + ',' +
           format_real(r.slope_w_right) + ',' + format_real(r.beta_left) + ',' +
           format_real(r.beta_right) + ',' + (r.converged ? "true" : "false") + ',' +
           algorithm_name(r.algorithm) + ',' + err + '\n';
  }
  return out;
}

std::string convergence_csv(const ConvergenceStudy& study) {
  std::string out =
      "n,weak_residual,sobolev_p1.5,sobolev_p2,holder_nu0.5,holder_nu0.75,e_mismatch\n";
  for (const auto& r : study.rows) {
    out += std::to_string(r.n) + ',' + format_real(r.weak_residual) + ',' +
           format_real(r.sobolev_p15) + ',' + format_real(r.sobolev_p2) + ',' +
           format_real(r.holder_half) + ',' + format_real(r.holder_three_quarters) + ',' +
           format_real(r.e_mismatch) + '\n';
  }
  out += "verdict";
  for (const auto& s : study.studies) out += std::string(",") + verdict_name(s.study.verdict);
  out += '\n';
  return out;
}

std::string convergence_json(const ConvergenceStudy& study) {
  json j = json::object();
  for (const auto& s : study.studies) j[s.name] = study_json(s.study);
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_digest"] = m.config_digest;
  j["artifacts"] = m.artifacts;
  j["wall_time"] = m.wall_time;
  j["tool_version"] = m.tool_version;
  return j.dump(2) + "\n";
}

}  // namespace sonic
