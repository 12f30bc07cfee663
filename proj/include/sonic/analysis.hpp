#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sonic/core_types.hpp"

namespace sonic {

enum class Endpoint { left, right };
const char* endpoint_name(Endpoint e);

/// Fit region near an endpoint, as distances from it: [delta_inner, delta_outer].
struct FitWindow {
  double delta_inner = 0.0;
  double delta_outer = 0.1;
  int min_points = 4;
};

/// Window used when none is given. Inner edge: five endpoint-cell widths.
/// Outer edge: the first distance at which rho - 1 exceeds a quarter of the
/// interior excursion max(rho) - 1, capped at 0.1. Throws InvalidInput when
/// the layer is thinner than the inner edge.
FitWindow default_fit_window(const Solution& sol, Endpoint endpoint);

/// Least-squares slope of log(rho - 1) against log(distance) over the window.
/// Throws DomainError when rho - 1 <= 0 inside the window, InvalidInput when
/// the window holds fewer than min_points nodes.
ExponentFit fit_boundary_exponent(const Solution& sol, Endpoint endpoint, const FitWindow& win);
ExponentFit fit_boundary_exponent(const Solution& sol, Endpoint endpoint);

/// Fixed seed for the random pairs of holder_seminorm.
inline constexpr unsigned long long kHolderSeed = 0x5EED5011ULL;

/// max |rho(x) - rho(y)| / |x - y|^nu over every node paired with both
/// endpoints, all neighbouring pairs and 8N pseudo-random pairs.
double holder_seminorm(const Solution& sol, double nu);

struct SobolevIntegral {
  double interior = 0.0;        // trapezoid rule over [x_1, x_{N-1}]
  double boundary_left = 0.0;   // secant estimate on the cell touching x = 0
  double boundary_right = 0.0;  // secant estimate on the cell touching x = 1
};

/// Integral of |rho_x|^p with rho_x = rho^3/(rho+1) * w_x/(rho-1) at interior nodes.
SobolevIntegral sobolev_integral(const Solution& sol, double p);

/// One-sided w_x at the endpoint: difference quotients over the three nearest
/// nodes, extrapolated with the model q(d) = a + c sqrt(d) + e d.
double endpoint_slope(const Solution& sol, Endpoint endpoint);

struct BarrierCheck {
  double m_empirical = 0.0;
  double beta_empirical = 0.0;
  bool upper_ok = false;
};

/// min over interior nodes of (rho - 1)/sin(pi x), and max rho <= b_sup + 1e-9.
BarrierCheck barrier_check(const Solution& sol, const DopingProfile& b);

struct SandwichCheck {
  double C1 = 0.0;
  double C2 = 0.0;
  bool ok = false;
};

/// Relative floor on C1/C2 for the sandwich to count as linear.
inline constexpr double kSandwichRatioFloor = 0.1;

/// C1 = min, C2 = max of (w - w_end)/distance over the window; ok when
/// C1 > 0 and C1 >= kSandwichRatioFloor * C2.
SandwichCheck sandwich_check(const Solution& sol, const FitWindow& win,
                             Endpoint endpoint = Endpoint::right);

// ---------------------------------------------------------------------------
// Refinement studies
// ---------------------------------------------------------------------------

enum class Verdict { bounded, divergent, inconclusive };
const char* verdict_name(Verdict v);

inline constexpr double kDivergentRatio = 1.15;
inline constexpr double kBoundedChange = 0.05;
inline constexpr std::size_t kMinDoublingsForDivergence = 3;

struct RefinementStudy {
  std::vector<std::size_t> levels;
  std::vector<double> values;
  std::vector<double> growth_ratios;
  Verdict verdict = Verdict::inconclusive;
};

/// divergent: every growth ratio >= 1.15 over at least three doublings;
/// bounded: the finest ratio within 5% of 1; inconclusive otherwise.
RefinementStudy classify_refinement(std::vector<std::size_t> levels, std::vector<double> values);

/// Levels n0, 2 n0, ..., 2^doublings n0.
std::vector<std::size_t> doubling_levels(std::size_t n0, std::size_t doublings);

double max_abs_first_difference(const Solution& sol);
double max_abs_second_difference(const Solution& sol);

struct DerivativeStudy {
  RefinementStudy first;   // max |rho_x|
  RefinementStudy second;  // max |rho_xx|
};

/// Solves cfg at every level (same grading) and tracks the discrete derivatives.
DerivativeStudy derivative_study(const DopingProfile& b, const SolverConfig& cfg,
                                 std::span<const std::size_t> levels);

/// derivative_study with a subsonic boundary rho(0) = rho(1) = rho_b.
DerivativeStudy subsonic_contrast(const DopingProfile& b, double rho_b, const SolverConfig& cfg,
                                  std::span<const std::size_t> levels);

struct TauSweepRow {
  double tau = 0.0;
  double slope_w_left = 0.0;
  double slope_w_right = 0.0;
  double beta_left = 0.0;
  double beta_right = 0.0;
  bool converged = false;
  Algorithm algorithm = Algorithm::picard_green;
  std::string note;
  std::string error;
};

/// One independent solve per tau, run concurrently; rows come back in input order.
/// A row whose picard-green solve does not converge is retried with newton
/// (recorded in `note`); any other failure is recorded in `error`.
std::vector<TauSweepRow> tau_sweep(const DopingProfile& b, std::span<const double> taus,
                                   const SolverConfig& base_cfg);

}  // namespace sonic
