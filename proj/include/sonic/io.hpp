#pragma once

// Experiment configs, artifact formats and run manifests.
//
// Config files are flat `key = value` lines; `#` starts a comment. Keys:
//   tau, boundary (sonic|subsonic), rho_b,
//   grid.n, grid.grading (uniform|clustered),
//   algorithm (picard-green|newton), tol, max_iter, damping,
//   b.kind (constant|piecewise|sine|tabulated) with
//     constant:  b.value
//     piecewise: b.breaks, b.values   (comma-separated lists)
//     sine:      b.base, b.amplitude, b.frequency
//     tabulated: b.x, b.y             (comma-separated lists)
//   convergence.n0 (base level of the convergence study)
// Missing keys take the defaults of the canonical experiment: b = 2, tau = 1,
// 1024 clustered cells, picard-green.

#include <filesystem>
#include <string>
#include <vector>

#include "sonic/core_types.hpp"
#include "sonic/pipeline.hpp"

namespace sonic {

struct ExperimentConfig {
  SolverConfig solver;
  DopingProfile doping = DopingProfile::constant(2.0);
  std::size_t convergence_n0 = 16;
};

/// Throws InvalidInput naming the line for unknown keys and malformed values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sorted `key = value` form with every field spelled out and reals at 17
/// significant digits; equal for semantically identical configs.
std::string canonical_config(const ExperimentConfig& cfg);

/// 16 hex digits of the 64-bit FNV-1a hash of canonical_config.
std::string config_digest(const ExperimentConfig& cfg);

/// %.17g: reads back to exactly v.
std::string format_real(double v);

/// Writes to a sibling temporary file and renames it into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string solution_csv(const Solution& sol, const std::vector<double>& e_poisson);

/// Reads x, rho, w (and E_flux into sol.E) from a solution.csv. The grid
/// keeps the given grading label.
Solution parse_solution_csv(const std::string& text, Grid::Grading grading);

std::string report_json(const ExperimentConfig& cfg, const Solution& sol);
std::string failure_report_json(const ExperimentConfig& cfg, const std::string& message,
                                const std::vector<double>& residual_history, int iterations);
std::string regularity_json(const RegularityAnalysis& analysis, const AnalysisOptions& opts);

std::string sweep_csv(const std::vector<TauSweepRow>& rows);
std::string convergence_csv(const ConvergenceStudy& study);
std::string convergence_json(const ConvergenceStudy& study);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::vector<std::string> artifacts;
  double wall_time = 0.0;
  std::string tool_version = SONIC_VERSION;
};

std::string manifest_json(const RunManifest& m);

}  // namespace sonic
