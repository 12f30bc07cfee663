#pragma once

// End-to-end analyses that combine a solve with the regularity diagnostics.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sonic/analysis.hpp"
#include "sonic/core_types.hpp"

namespace sonic {

struct AnalysisOptions {
  std::vector<double> nus = {0.5};  // Holder exponents tabulated per level
  std::vector<double> ps = {1.5};   // Sobolev exponents tabulated per level
  std::optional<Endpoint> endpoint;  // empty: both endpoints
  bool refinement = true;            // run the refinement studies behind the verdicts
  std::size_t study_n0 = 16;
  std::size_t study_doublings = 4;
};

struct NamedStudy {
  std::string name;
  RefinementStudy study;
};

struct RegularityAnalysis {
  RegularityReport report;
  std::vector<NamedStudy> studies;
  SandwichCheck sandwich;
  BarrierCheck barrier;
};

/// Verdict thresholds.
inline constexpr double kExponentLow = 0.45;
inline constexpr double kExponentHigh = 0.55;
inline constexpr double kMinFitQuality = 0.99;
inline constexpr double kHolderBoundedRatio = 1.1;
inline constexpr double kHolderDivergentGrowth = 1.5;

/// Diagnostics of `sol` (the solution of cfg, b) plus refinement studies that
/// re-solve cfg at study_n0 * 2^k cells. Verdicts:
///   right_singularity  beta_right in [0.45, 0.55] with fit quality >= 0.99
///   left_singularity   the same at x = 0
///   holder_half        nu = 1/2 seminorm ratios <= 1.1, nu = 3/4 strictly
///                      increasing with total growth >= 1.5
///   sobolev_sub2       p = 1.5 bounded and p = 2 divergent
/// A failing section is recorded in report.failures and the rest still runs.
RegularityAnalysis analyze(const Solution& sol, const SolverConfig& cfg, const DopingProfile& b,
                           const AnalysisOptions& opts = {});

struct ConvergenceRow {
  std::size_t n = 0;
  double weak_residual = 0.0;
  double sobolev_p15 = 0.0;
  double sobolev_p2 = 0.0;
  double holder_half = 0.0;
  double holder_three_quarters = 0.0;
  double e_mismatch = 0.0;  // max |E_flux - E_poisson|
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  std::vector<NamedStudy> studies;
};

/// Solves cfg at n0 * 2^k cells, k = 0..doublings (doublings >= 3).
ConvergenceStudy convergence_study(const SolverConfig& cfg, const DopingProfile& b, std::size_t n0,
                                   std::size_t doublings);

/// max |E_flux - E_poisson| with E_poisson anchored to E_flux at x = 0.
double e_field_mismatch(const Solution& sol, const DopingProfile& b, double tau);

}  // namespace sonic
