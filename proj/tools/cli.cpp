#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sonic/io.hpp"
#include "sonic/solver.hpp"

namespace sonic::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> parse_tau_list(const std::string& text) {
  std::vector<double> taus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidInput("--tau: '" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw InvalidInput("--tau: '" + item + "' is not a number");
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidInput("--tau: every relaxation time must be positive and finite, got " + item);
    taus.push_back(v);
  }
  if (taus.empty()) throw InvalidInput("--tau: empty list");
  return taus;
}

/// Rebuilds the experiment config stored in a report.json.
ExperimentConfig config_from_report(const fs::path& report) {
  const auto j = nlohmann::json::parse(read_file(report), nullptr, false);
  if (j.is_discarded() || !j.contains("config") || !j["config"].is_object())
    throw InvalidInput(report.string() + " has no config section");
  std::string text;
  for (const auto& [key, value] : j["config"].items()) {
    if (!value.is_string()) throw InvalidInput(report.string() + ": config values must be strings");
    text += key + " = " + value.get<std::string>() + "\n";
  }
  return parse_config(text);
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    std::vector<std::string> artifacts, Clock::time_point t0) {
  RunManifest m;
  m.command = command;
  m.config_digest = config_digest(cfg);
  artifacts.push_back((dir / "manifest.json").string());
  m.artifacts = std::move(artifacts);
  m.wall_time = seconds_since(t0);
  atomic_write(dir / "manifest.json", manifest_json(m));
}

int cmd_solve(const std::string& config_path, const fs::path& dir, const std::string& command) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = load_config(config_path);
  try {
    const Solution sol = solve_steady(cfg.solver, cfg.doping);
    const auto e_poisson = recover_E_poisson(sol, cfg.doping, sol.E.front());
    atomic_write(dir / "solution.csv", solution_csv(sol, e_poisson));
    atomic_write(dir / "report.json", report_json(cfg, sol));
    write_manifest(dir, command, cfg,
                   {(dir / "solution.csv").string(), (dir / "report.json").string()}, t0);
    std::cout << "converged in " << sol.iterations << " iterations, residual "
              << format_real(sol.final_residual) << "\n";
    return kExitOk;
  } catch (const ConvergenceError& e) {
    atomic_write(dir / "report.json",
                 failure_report_json(cfg, e.what(), e.residual_history(), e.iterations()));
    write_manifest(dir, command, cfg, {(dir / "report.json").string()}, t0);
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const NumericError& e) {
    atomic_write(dir / "report.json",
                 failure_report_json(cfg, e.what(), e.residual_history(),
                                     static_cast<int>(e.residual_history().size())));
    write_manifest(dir, command, cfg, {(dir / "report.json").string()}, t0);
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
}

int cmd_analyze(const std::string& input, const AnalysisOptions& opts, const fs::path& dir,
                const std::string& command) {
  const auto t0 = Clock::now();
  const fs::path path(input);
  ExperimentConfig cfg;
  Solution sol;
  if (path.extension() == ".csv") {
    cfg = config_from_report(path.parent_path() / "report.json");
    sol = parse_solution_csv(read_file(path), cfg.solver.grid.grading());
    cfg.solver.grid = sol.grid;
  } else {
    cfg = load_config(path);
    sol = solve_steady(cfg.solver, cfg.doping);
  }
  const RegularityAnalysis a = analyze(sol, cfg.solver, cfg.doping, opts);
  atomic_write(dir / "regularity_report.json", regularity_json(a, opts));
  write_manifest(dir, command, cfg, {(dir / "regularity_report.json").string()}, t0);
  for (const auto& [name, ok] : a.report.verdicts)
    std::cout << name << " = " << (ok ? "true" : "false") << "\n";
  for (const auto& [section, msg] : a.report.failures)
    std::cerr << "warning: " << section << ": " << msg << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& tau_text, const fs::path& dir,
              const std::string& command) {
  const auto t0 = Clock::now();
  const auto taus = parse_tau_list(tau_text);
  const ExperimentConfig cfg = load_config(config_path);
  const auto rows = tau_sweep(cfg.doping, taus, cfg.solver);
  atomic_write(dir / "sweep.csv", sweep_csv(rows));
  write_manifest(dir, command, cfg, {(dir / "sweep.csv").string()}, t0);
  for (const auto& r : rows)
    if (!r.error.empty()) std::cerr << "warning: tau = " << format_real(r.tau) << ": " << r.error << "\n";
  return kExitOk;
}

int cmd_convergence(const std::string& config_path, int levels, const fs::path& dir,
                    const std::string& command) {
  const auto t0 = Clock::now();
  if (levels < 3) throw InvalidInput("--levels must be at least 3 (got " + std::to_string(levels) + ")");
  const ExperimentConfig cfg = load_config(config_path);
  const auto study = convergence_study(cfg.solver, cfg.doping, cfg.convergence_n0,
                                       static_cast<std::size_t>(levels));
  atomic_write(dir / "convergence.csv", convergence_csv(study));
  write_manifest(dir, command, cfg, {(dir / "convergence.csv").string()}, t0);
  for (const auto& s : study.studies) std::cout << s.name << ": " << verdict_name(s.study.verdict) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Steady Euler-Poisson solver with sonic boundary", "sonic"};
  app.set_version_flag("--version", SONIC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_flag;
  app.add_option("-o,--out-dir", out_flag, std::string("Artifact directory (default: $") + kOutputDirEnv + " or .)");

  std::string path;
  auto* solve = app.add_subcommand("solve", "Solve a configured experiment");
  solve->add_option("config", path, "Config file")->required();

  std::vector<double> nus, ps;
  std::string endpoint;
  bool no_refinement = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Regularity report for a config or solution.csv");
  analyze_cmd->add_option("input", path, "Config file or solution.csv")->required();
  analyze_cmd->add_option("--nu", nus, "Extra Holder exponents")->delimiter(',');
  analyze_cmd->add_option("--p", ps, "Extra Sobolev exponents")->delimiter(',');
  analyze_cmd->add_option("--endpoint", endpoint, "Restrict the endpoint analysis")
      ->check(CLI::IsMember({"left", "right"}));
  analyze_cmd->add_flag("--no-refinement", no_refinement, "Skip the refinement studies");

  std::string tau_text;
  auto* sweep = app.add_subcommand("sweep", "Endpoint slopes and exponents across relaxation times");
  sweep->add_option("config", path, "Config file")->required();
  sweep->add_option("--tau", tau_text, "Comma-separated relaxation times")->required();

  int levels = 0;
  auto* conv = app.add_subcommand("convergence", "Grid refinement study");
  conv->add_option("config", path, "Config file")->required();
  conv->add_option("--levels", levels, "Number of grid doublings (>= 3)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  std::string command = "sonic";
  for (const auto& a : args) command += " " + a;

  try {
    const fs::path dir = output_dir(out_flag);
    fs::create_directories(dir);
    if (*solve) return cmd_solve(path, dir, command);
    if (*analyze_cmd) {
      AnalysisOptions opts;
      for (double nu : nus)
        if (std::find(opts.nus.begin(), opts.nus.end(), nu) == opts.nus.end()) opts.nus.push_back(nu);
      for (double p : ps)
        if (std::find(opts.ps.begin(), opts.ps.end(), p) == opts.ps.end()) opts.ps.push_back(p);
      for (double nu : opts.nus)
        if (!(nu > 0.0 && nu <= 1.0)) throw InvalidInput("--nu must lie in (0, 1]");
      for (double p : opts.ps)
        if (!(p >= 1.0)) throw InvalidInput("--p must be at least 1");
      if (endpoint == "left") opts.endpoint = Endpoint::left;
      if (endpoint == "right") opts.endpoint = Endpoint::right;
      opts.refinement = !no_refinement;
      return cmd_analyze(path, opts, dir, command);
    }
    if (*sweep) return cmd_sweep(path, tau_text, dir, command);
    return cmd_convergence(path, levels, dir, command);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sonic::cli
