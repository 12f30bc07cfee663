#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sonic {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised for structurally invalid input (bad breakpoints, unsorted tables, ...).
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure with the residual trace accumulated so far.
class NumericError : public std::runtime_error {
public:
  NumericError(const std::string& what, std::vector<double> history = {})
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

/// Iteration budget exhausted before the residual reached tolerance.
class ConvergenceError : public NumericError {
public:
  ConvergenceError(const std::string& what, std::vector<double> history, int iterations)
      : NumericError(what, std::move(history)), iterations_(iterations) {}

  int iterations() const noexcept { return iterations_; }

private:
  int iterations_;
};

// ---------------------------------------------------------------------------
// Doping profile b(x) on [0,1].
//
// Immutable after construction. b_inf/b_sup are the essential bounds: closed
// form for the analytic kinds, min/max of the samples for tabulated data.
// The subsonic requirement b_inf > 1 is not enforced here; validate_config
// reports it so that rejected profiles can still be described.
// ---------------------------------------------------------------------------
class DopingProfile {
public:
  enum class Kind { constant, piecewise_constant, sine_perturbed, tabulated };

  static DopingProfile constant(double value);
  /// `breaks` are the interior jump locations (strictly increasing, inside
  /// (0,1)); values.size() == breaks.size() + 1. Piece k covers
  /// [breaks[k-1], breaks[k]) and the last piece is closed at x = 1.
  static DopingProfile piecewise(std::vector<double> breaks, std::vector<double> values);
  /// base + amplitude * sin(frequency * pi * x), frequency > 0.
  static DopingProfile sine(double base, double amplitude, double frequency);
  /// Linear interpolation through (xs, ys); xs strictly increasing from 0 to 1.
  static DopingProfile tabulated(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;

  Kind kind() const noexcept { return kind_; }
  double b_inf() const noexcept { return b_inf_; }
  double b_sup() const noexcept { return b_sup_; }

  /// Kind-specific parameters, in the order used by describe() and the config keys.
  const std::vector<double>& abscissae() const noexcept { return xs_; }
  const std::vector<double>& ordinates() const noexcept { return ys_; }
  double base() const noexcept { return base_; }
  double amplitude() const noexcept { return amplitude_; }
  double frequency() const noexcept { return frequency_; }

  /// Canonical textual form, stable across runs (used for digests and reports).
  std::string describe() const;

  static const char* kind_name(Kind k);

private:
  DopingProfile() = default;

  Kind kind_ = Kind::constant;
  std::vector<double> xs_;  // breaks (piecewise) or sample abscissae (tabulated)
  std::vector<double> ys_;  // piece values or sample ordinates
  double base_ = 0.0;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  double b_inf_ = 0.0;
  double b_sup_ = 0.0;
};

// ---------------------------------------------------------------------------
// 1-D mesh on [0,1] with exact endpoints.
// ---------------------------------------------------------------------------
class Grid {
public:
  enum class Grading { uniform, endpoint_clustered };

  static Grid uniform(std::size_t n_cells);
  /// Chebyshev-Gauss-Lobatto points x_i = (1 - cos(pi i/N))/2. Spacing is
  /// O(1/N^2) next to both endpoints.
  static Grid clustered(std::size_t n_cells);
  static Grid make(Grading grading, std::size_t n_cells);
  /// Arbitrary nodes, validated: strictly increasing, first 0, last 1.
  static Grid from_nodes(std::vector<double> nodes, Grading grading = Grading::uniform);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  std::size_t n_cells() const noexcept { return nodes_.size() - 1; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double spacing(std::size_t cell) const { return nodes_[cell + 1] - nodes_[cell]; }
  Grading grading() const noexcept { return grading_; }

  double distance_to_left(std::size_t i) const { return nodes_[i]; }
  double distance_to_right(std::size_t i) const { return 1.0 - nodes_[i]; }

  static const char* grading_name(Grading g);

private:
  Grid() = default;

  std::vector<double> nodes_;
  Grading grading_ = Grading::uniform;
};

enum class Algorithm { picard_green, newton };
enum class BoundaryMode { sonic, subsonic };

const char* algorithm_name(Algorithm a);
const char* boundary_name(BoundaryMode b);

struct SolverConfig {
  double tau = 1.0;
  BoundaryMode boundary = BoundaryMode::sonic;
  double rho_b = 1.0;  // only read in subsonic mode
  Grid grid = Grid::clustered(1024);
  Algorithm algorithm = Algorithm::picard_green;
  double tol_residual = 1e-12;
  int max_iter = 200;
  double damping = 0.8;

  /// Density imposed at both endpoints: 1 for sonic, rho_b for subsonic.
  double boundary_density() const noexcept {
    return boundary == BoundaryMode::sonic ? 1.0 : rho_b;
  }
};

/// Default iteration budget per algorithm (picard 200, newton 50).
int default_max_iter(Algorithm a);

/// Every violated constraint as a human-readable message; empty means ok.
std::vector<std::string> validate_config(const SolverConfig& cfg, const DopingProfile& b);

double evaluate_doping(const DopingProfile& b, double x);

struct Solution {
  Grid grid = Grid::uniform(2);
  std::vector<double> rho;
  std::vector<double> w;
  std::vector<double> E;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<std::string> warnings;
};

struct ExponentFit {
  double beta = 0.0;
  double amplitude = 0.0;
  double fit_quality = 0.0;  // coefficient of determination
};

struct SobolevRow {
  double p;
  std::size_t level;  // number of cells
  double value;
};

struct HolderRow {
  double nu;
  std::size_t level;
  double value;
};

struct RegularityReport {
  ExponentFit exponent_right;
  ExponentFit exponent_left;
  double slope_w_right = 0.0;
  double slope_w_left = 0.0;
  double barrier_beta = 0.0;
  double sandwich_c1 = 0.0;
  double sandwich_c2 = 0.0;
  std::vector<SobolevRow> sobolev_table;
  std::vector<HolderRow> holder_table;
  std::vector<std::pair<std::string, bool>> verdicts;
  std::vector<std::pair<std::string, std::string>> failures;  // section -> message
};

}  // namespace sonic
