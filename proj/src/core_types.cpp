#include "sonic/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace sonic {

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Range of sin(theta) for theta in [0, theta_max].
std::pair<double, double> sine_range(double theta_max) {
  const double pi = std::numbers::pi;
  double hi = theta_max >= pi / 2 ? 1.0 : std::sin(theta_max);
  double lo = theta_max >= 1.5 * pi ? -1.0 : std::min(0.0, std::sin(theta_max));
  return {lo, hi};
}

}  // namespace

DopingProfile DopingProfile::constant(double value) {
  if (!std::isfinite(value)) throw InvalidInput("constant doping must be finite");
  DopingProfile b;
  b.kind_ = Kind::constant;
  b.base_ = value;
  b.b_inf_ = b.b_sup_ = value;
  return b;
}

DopingProfile DopingProfile::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1)
    throw InvalidInput("piecewise doping needs exactly one more value than breakpoints");
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    if (!(breaks[k] > 0.0 && breaks[k] < 1.0))
      throw InvalidInput("piecewise breakpoints must lie strictly inside (0,1)");
    if (k > 0 && !(breaks[k] > breaks[k - 1]))
      throw InvalidInput("piecewise breakpoints must be strictly increasing");
  }
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidInput("piecewise doping values must be finite");
  DopingProfile b;
  b.kind_ = Kind::piecewise_constant;
  b.b_inf_ = *std::min_element(values.begin(), values.end());
  b.b_sup_ = *std::max_element(values.begin(), values.end());
  b.xs_ = std::move(breaks);
  b.ys_ = std::move(values);
  return b;
}

DopingProfile DopingProfile::sine(double base, double amplitude, double frequency) {
  if (!(frequency > 0.0) || !std::isfinite(frequency))
    throw InvalidInput("sine doping frequency must be positive");
  if (!std::isfinite(base) || !std::isfinite(amplitude))
    throw InvalidInput("sine doping parameters must be finite");
  DopingProfile b;
  b.kind_ = Kind::sine_perturbed;
  b.base_ = base;
  b.amplitude_ = amplitude;
  b.frequency_ = frequency;
  auto [lo, hi] = sine_range(frequency * std::numbers::pi);
  b.b_inf_ = base + std::min(amplitude * lo, amplitude * hi);
  b.b_sup_ = base + std::max(amplitude * lo, amplitude * hi);
  return b;
}

DopingProfile DopingProfile::tabulated(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() < 2 || xs.size() != ys.size())
    throw InvalidInput("tabulated doping needs at least two (x, b) samples of equal length");
  if (xs.front() != 0.0 || xs.back() != 1.0)
    throw InvalidInput("tabulated doping samples must cover [0,1] exactly");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw InvalidInput("tabulated doping abscissae must be strictly increasing");
  for (double v : ys)
    if (!std::isfinite(v)) throw InvalidInput("tabulated doping values must be finite");
  DopingProfile b;
  b.kind_ = Kind::tabulated;
  b.b_inf_ = *std::min_element(ys.begin(), ys.end());
  b.b_sup_ = *std::max_element(ys.begin(), ys.end());
  b.xs_ = std::move(xs);
  b.ys_ = std::move(ys);
  return b;
}

double DopingProfile::operator()(double x) const {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("doping profile evaluated outside [0,1]: x = " + fmt17(x));
  switch (kind_) {
    case Kind::constant:
      return base_;
    case Kind::piecewise_constant: {
      auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      return ys_[static_cast<std::size_t>(it - xs_.begin())];
    }
    case Kind::sine_perturbed: {
      double v = base_ + amplitude_ * std::sin(frequency_ * std::numbers::pi * x);
      return std::clamp(v, b_inf_, b_sup_);
    }
    case Kind::tabulated: {
      auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      if (it == xs_.end()) return ys_.back();
      std::size_t k = static_cast<std::size_t>(it - xs_.begin());
      double t = (x - xs_[k - 1]) / (xs_[k] - xs_[k - 1]);
      return std::clamp(ys_[k - 1] + t * (ys_[k] - ys_[k - 1]), b_inf_, b_sup_);
    }
  }
  return base_;
}

const char* DopingProfile::kind_name(Kind k) {
  switch (k) {
    case Kind::constant: return "constant";
    case Kind::piecewise_constant: return "piecewise";
    case Kind::sine_perturbed: return "sine";
    case Kind::tabulated: return "tabulated";
  }
  return "?";
}

std::string DopingProfile::describe() const {
  std::ostringstream os;
  os << kind_name(kind_);
  auto list = [&os](const char* key, const std::vector<double>& v) {
    os << ' ' << key << '=';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << fmt17(v[i]);
  };
  switch (kind_) {
    case Kind::constant:
      os << " value=" << fmt17(base_);
      break;
    case Kind::piecewise_constant:
      list("breaks", xs_);
      list("values", ys_);
      break;
    case Kind::sine_perturbed:
      os << " base=" << fmt17(base_) << " amplitude=" << fmt17(amplitude_)
         << " frequency=" << fmt17(frequency_);
      break;
    case Kind::tabulated:
      list("x", xs_);
      list("y", ys_);
      break;
  }
  return os.str();
}

double evaluate_doping(const DopingProfile& b, double x) { return b(x); }

// --- Grid -------------------------------------------------------------------

Grid Grid::uniform(std::size_t n_cells) {
  if (n_cells < 2) throw InvalidInput("grid needs at least 2 cells");
  Grid g;
  g.grading_ = Grading::uniform;
  g.nodes_.resize(n_cells + 1);
  const double n = static_cast<double>(n_cells);
  for (std::size_t i = 0; i <= n_cells; ++i) g.nodes_[i] = static_cast<double>(i) / n;
  g.nodes_.back() = 1.0;
  return g;
}

Grid Grid::clustered(std::size_t n_cells) {
  if (n_cells < 2) throw InvalidInput("grid needs at least 2 cells");
  Grid g;
  g.grading_ = Grading::endpoint_clustered;
  g.nodes_.resize(n_cells + 1);
  const double n = static_cast<double>(n_cells);
  // (1 - cos t)/2 = sin^2(t/2); the sine form keeps full relative accuracy
  // next to x = 0, and the right half is mirrored.
  auto half_sin2 = [n](std::size_t i) {
    double s = std::sin(std::numbers::pi * static_cast<double>(i) / (2.0 * n));
    return s * s;
  };
  for (std::size_t i = 0; i <= n_cells; ++i) {
    g.nodes_[i] = 2 * i <= n_cells ? half_sin2(i) : 1.0 - half_sin2(n_cells - i);
  }
  g.nodes_.front() = 0.0;
  g.nodes_.back() = 1.0;
  return g;
}

Grid Grid::make(Grading grading, std::size_t n_cells) {
  return grading == Grading::uniform ? uniform(n_cells) : clustered(n_cells);
}

Grid Grid::from_nodes(std::vector<double> nodes, Grading grading) {
  if (nodes.size() < 3) throw InvalidInput("grid needs at least 2 cells");
  if (nodes.front() != 0.0 || nodes.back() != 1.0)
    throw InvalidInput("grid endpoints must be exactly 0 and 1");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw InvalidInput("grid nodes must be strictly increasing");
  Grid g;
  g.grading_ = grading;
  g.nodes_ = std::move(nodes);
  return g;
}

const char* Grid::grading_name(Grading g) {
  return g == Grading::uniform ? "uniform" : "clustered";
}

const char* algorithm_name(Algorithm a) {
  return a == Algorithm::picard_green ? "picard-green" : "newton";
}

const char* boundary_name(BoundaryMode b) {
  return b == BoundaryMode::sonic ? "sonic" : "subsonic";
}

int default_max_iter(Algorithm a) { return a == Algorithm::picard_green ? 200 : 50; }

std::vector<std::string> validate_config(const SolverConfig& cfg, const DopingProfile& b) {
  std::vector<std::string> errors;
  if (!(b.b_inf() > 1.0))
    errors.push_back("b_inf = " + fmt17(b.b_inf()) +
                     " <= 1 violates subsonic doping (essinf b > 1 is required for existence)");
  if (!(b.b_sup() >= b.b_inf())) errors.push_back("b_sup must be >= b_inf");
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau))
    errors.push_back("tau must be a positive finite relaxation time");
  if (cfg.boundary == BoundaryMode::subsonic && !(cfg.rho_b > 1.0))
    errors.push_back("rho_b must exceed 1 for a subsonic boundary (got " + fmt17(cfg.rho_b) + ")");
  if (!(cfg.tol_residual > 0.0)) errors.push_back("tol_residual must be positive");
  if (cfg.max_iter < 1) errors.push_back("max_iter must be at least 1");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) errors.push_back("damping must lie in (0,1]");
  if (cfg.grid.n_cells() < 4) errors.push_back("grid needs at least 4 cells");
  return errors;
}

}  // namespace sonic
