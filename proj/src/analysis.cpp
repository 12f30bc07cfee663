#include "sonic/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>

#include "sonic/discrete.hpp"
#include "sonic/solver.hpp"

namespace sonic {

namespace {

constexpr double pi = std::numbers::pi;

// Node index at distance rank k from the endpoint (k = 0 is the endpoint).
std::size_t node_from(const Solution& sol, Endpoint e, std::size_t k) {
  return e == Endpoint::left ? k : sol.grid.size() - 1 - k;
}

double distance(const Solution& sol, Endpoint e, std::size_t i) {
  return e == Endpoint::left ? sol.grid.distance_to_left(i) : sol.grid.distance_to_right(i);
}

}  // namespace

const char* endpoint_name(Endpoint e) { return e == Endpoint::left ? "left" : "right"; }

FitWindow default_fit_window(const Solution& sol, Endpoint endpoint) {
  constexpr double cap = 0.1;
  constexpr double excursion_fraction = 0.25;
  const std::size_t n = sol.grid.size();
  const double end_rho = sol.rho[node_from(sol, endpoint, 0)];
  double excursion = 0.0;
  for (double r : sol.rho) excursion = std::max(excursion, r - end_rho);

  FitWindow win;
  const std::size_t end_cell = endpoint == Endpoint::left ? 0 : n - 2;
  win.delta_inner = 5.0 * sol.grid.spacing(end_cell);
  win.delta_outer = cap;
  for (std::size_t k = 1; k < n / 2; ++k) {
    const std::size_t i = node_from(sol, endpoint, k);
    const double d = distance(sol, endpoint, i);
    if (d > cap) break;
    if (sol.rho[i] - end_rho > excursion_fraction * excursion) {
      win.delta_outer = d;
      break;
    }
  }
  if (win.delta_outer <= win.delta_inner)
    throw InvalidInput(std::string("boundary layer at the ") + endpoint_name(endpoint) +
                       " endpoint is thinner than five boundary cells; refine the grid");
  return win;
}

ExponentFit fit_boundary_exponent(const Solution& sol, Endpoint endpoint, const FitWindow& win) {
  if (!(win.delta_inner >= 0.0 && win.delta_inner < win.delta_outer && win.delta_outer <= 0.5))
    throw InvalidInput("fit window must satisfy 0 <= delta_inner < delta_outer <= 1/2");
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k < sol.grid.size(); ++k) {
    const std::size_t i = node_from(sol, endpoint, k);
    const double d = distance(sol, endpoint, i);
    if (d > win.delta_outer) break;
    if (d < win.delta_inner) continue;
    const double excess = sol.rho[i] - 1.0;
    if (!(excess > 0.0))
      throw DomainError("fit_boundary_exponent: rho - 1 <= 0 at distance " + std::to_string(d) +
                        " from the " + endpoint_name(endpoint) + " endpoint");
    xs.push_back(std::log(d));
    ys.push_back(std::log(excess));
  }
  if (static_cast<int>(xs.size()) < win.min_points)
    throw InvalidInput("fit_boundary_exponent: window holds " + std::to_string(xs.size()) +
                       " nodes, need " + std::to_string(win.min_points));

  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k], my += ys[k];
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  ExponentFit fit;
  fit.beta = sxy / sxx;
  fit.amplitude = std::exp(my - fit.beta * mx);
  double ssr = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (my + fit.beta * (xs[k] - mx));
    ssr += r * r;
  }
  fit.fit_quality = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return fit;
}

ExponentFit fit_boundary_exponent(const Solution& sol, Endpoint endpoint) {
  return fit_boundary_exponent(sol, endpoint, default_fit_window(sol, endpoint));
}

double holder_seminorm(const Solution& sol, double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw DomainError("holder_seminorm: nu must lie in (0,1]");
  const auto& x = sol.grid.nodes();
  const auto& rho = sol.rho;
  const std::size_t n = x.size();
  double best = 0.0;
  auto consider = [&](std::size_t i, std::size_t j) {
    if (i == j) return;
    const double dx = std::abs(x[i] - x[j]);
    best = std::max(best, std::abs(rho[i] - rho[j]) / std::pow(dx, nu));
  };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    consider(i, 0);
    consider(i, n - 1);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) consider(i, i + 1);
  // Raw engine output keeps the pair sequence identical across standard libraries.
  std::mt19937_64 rng(kHolderSeed);
  for (std::size_t k = 0; k < 8 * n; ++k) consider(rng() % n, rng() % n);
  return best;
}

namespace {

// Integral over cell [x_i, x_{i+1}] of the power law g = g_a (d/d_a)^alpha in the
// distance d to the nearer endpoint through both nodal values; trapezoid rule
// when a power law does not fit.
double power_law_cell(const Grid& g, const std::vector<double>& v, std::size_t i) {
  const double h = g.spacing(i);
  const double trapezoid = 0.5 * h * (v[i] + v[i + 1]);
  const bool left_half = g[i] + g[i + 1] < 1.0;
  double da = left_half ? g[i] : 1.0 - g[i + 1];
  double db = left_half ? g[i + 1] : 1.0 - g[i];
  double ga = left_half ? v[i] : v[i + 1];
  double gb = left_half ? v[i + 1] : v[i];
  if (!(da > 0.0 && db > da && ga > 0.0 && gb > 0.0)) return trapezoid;
  const double L = std::log(db / da);
  const double alpha = std::log(gb / ga) / L;
  if (!std::isfinite(alpha)) return trapezoid;
  const double s = (alpha + 1.0) * L;
  const double factor = s == 0.0 ? 1.0 : std::expm1(s) / s;
  return ga * da * L * factor;
}

}  // namespace

SobolevIntegral sobolev_integral(const Solution& sol, double p) {
  if (!(p >= 1.0)) throw DomainError("sobolev_integral: p must be >= 1");
  const Grid& g = sol.grid;
  const std::size_t n = g.size();
  const auto wx = discrete::nodal_derivative_sqrt_ends(g, sol.w);
  std::vector<double> integrand(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double r = sol.rho[i];
    double rx;
    if (r - 1.0 > 0.0) {
      rx = r * r * r / (r + 1.0) * wx[i] / (r - 1.0);
    } else {
      rx = (sol.rho[i + 1] - sol.rho[i - 1]) / (g[i + 1] - g[i - 1]);
    }
    integrand[i] = std::pow(std::abs(rx), p);
  }
  SobolevIntegral out;
  for (std::size_t i = 1; i + 2 < n; ++i) out.interior += power_law_cell(g, integrand, i);
  auto secant = [&](std::size_t cell) {
    const double h = g.spacing(cell);
    return std::pow(std::abs(sol.rho[cell + 1] - sol.rho[cell]) / h, p) * h;
  };
  out.boundary_left = secant(0);
  out.boundary_right = secant(n - 2);
  return out;
}

double endpoint_slope(const Solution& sol, Endpoint endpoint) {
  if (sol.grid.size() < 4) throw InvalidInput("endpoint_slope: need at least three cells");
  const double w_end = sol.w[node_from(sol, endpoint, 0)];
  double d[3], q[3];
  for (std::size_t k = 1; k <= 3; ++k) {
    const std::size_t i = node_from(sol, endpoint, k);
    d[k - 1] = distance(sol, endpoint, i);
    q[k - 1] = (sol.w[i] - w_end) / d[k - 1];
  }
  // Solve [1 sqrt(d_k) d_k] (a c e)^T = q_k by Cramer's rule.
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  double A[3][3], Aa[3][3];
  for (int k = 0; k < 3; ++k) {
    A[k][0] = 1.0;
    A[k][1] = std::sqrt(d[k]);
    A[k][2] = d[k];
    Aa[k][0] = q[k];
    Aa[k][1] = A[k][1];
    Aa[k][2] = A[k][2];
  }
  const double a = det3(Aa) / det3(A);
  return endpoint == Endpoint::left ? a : -a;
}

BarrierCheck barrier_check(const Solution& sol, const DopingProfile& b) {
  BarrierCheck out;
  double m = std::numeric_limits<double>::infinity();
  double top = -std::numeric_limits<double>::infinity();
  const std::size_t n = sol.grid.size();
  for (std::size_t i = 0; i < n; ++i) top = std::max(top, sol.rho[i]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double s = std::sin(pi * sol.grid[i]);
    if (s > 0.0) m = std::min(m, (sol.rho[i] - 1.0) / s);
  }
  out.m_empirical = out.beta_empirical = m;
  out.upper_ok = top <= b.b_sup() + 1e-9;
  return out;
}

SandwichCheck sandwich_check(const Solution& sol, const FitWindow& win, Endpoint endpoint) {
  const double w_end = sol.w[node_from(sol, endpoint, 0)];
  SandwichCheck out;
  out.C1 = std::numeric_limits<double>::infinity();
  out.C2 = -std::numeric_limits<double>::infinity();
  int count = 0;
  for (std::size_t k = 1; k < sol.grid.size(); ++k) {
    const std::size_t i = node_from(sol, endpoint, k);
    const double d = distance(sol, endpoint, i);
    if (d > win.delta_outer) break;
    if (d < win.delta_inner) continue;
    const double ratio = (sol.w[i] - w_end) / d;
    out.C1 = std::min(out.C1, ratio);
    out.C2 = std::max(out.C2, ratio);
    ++count;
  }
  if (count == 0) throw InvalidInput("sandwich_check: window holds no nodes");
  out.ok = out.C1 > 0.0 && out.C1 >= kSandwichRatioFloor * out.C2;
  return out;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::divergent: return "divergent";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

RefinementStudy classify_refinement(std::vector<std::size_t> levels, std::vector<double> values) {
  if (levels.size() != values.size()) throw InvalidInput("refinement study: size mismatch");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] <= levels[k - 1]) throw InvalidInput("refinement levels must increase");
  RefinementStudy s;
  s.levels = std::move(levels);
  s.values = std::move(values);
  for (std::size_t k = 1; k < s.values.size(); ++k) {
    const double prev = s.values[k - 1], cur = s.values[k];
    s.growth_ratios.push_back(prev == 0.0 ? (cur == 0.0 ? 1.0 : std::numeric_limits<double>::infinity())
                                          : cur / prev);
  }
  if (s.growth_ratios.empty()) return s;
  const bool all_growing = std::all_of(s.growth_ratios.begin(), s.growth_ratios.end(),
                                       [](double r) { return r >= kDivergentRatio; });
  if (all_growing && s.growth_ratios.size() >= kMinDoublingsForDivergence)
    s.verdict = Verdict::divergent;
  else if (std::abs(s.growth_ratios.back() - 1.0) <= kBoundedChange)
    s.verdict = Verdict::bounded;
  return s;
}

std::vector<std::size_t> doubling_levels(std::size_t n0, std::size_t doublings) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= doublings; ++k) out.push_back(n0 << k);
  return out;
}

double max_abs_first_difference(const Solution& sol) {
  double m = 0.0;
  for (std::size_t c = 0; c + 1 < sol.grid.size(); ++c)
    m = std::max(m, std::abs(sol.rho[c + 1] - sol.rho[c]) / sol.grid.spacing(c));
  return m;
}

double max_abs_second_difference(const Solution& sol) {
  auto d2 = discrete::second_difference(sol.grid, sol.rho);
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < d2.size(); ++i) m = std::max(m, std::abs(d2[i]));
  return m;
}

DerivativeStudy derivative_study(const DopingProfile& b, const SolverConfig& cfg,
                                 std::span<const std::size_t> levels) {
  std::vector<double> first, second;
  for (std::size_t n : levels) {
    SolverConfig c = cfg;
    c.grid = Grid::make(cfg.grid.grading(), n);
    const Solution sol = solve_steady(c, b);
    first.push_back(max_abs_first_difference(sol));
    second.push_back(max_abs_second_difference(sol));
  }
  std::vector<std::size_t> lv(levels.begin(), levels.end());
  return {classify_refinement(lv, std::move(first)), classify_refinement(lv, std::move(second))};
}

DerivativeStudy subsonic_contrast(const DopingProfile& b, double rho_b, const SolverConfig& cfg,
                                  std::span<const std::size_t> levels) {
  if (!(rho_b > 1.0)) throw DomainError("subsonic_contrast: rho_b must exceed 1");
  SolverConfig c = cfg;
  c.boundary = BoundaryMode::subsonic;
  c.rho_b = rho_b;
  return derivative_study(b, c, levels);
}

std::vector<TauSweepRow> tau_sweep(const DopingProfile& b, std::span<const double> taus,
                                   const SolverConfig& base_cfg) {
  std::vector<std::future<TauSweepRow>> jobs;
  jobs.reserve(taus.size());
  for (double tau : taus) {
    jobs.push_back(std::async(std::launch::async, [&b, &base_cfg, tau] {
      TauSweepRow row;
      row.tau = tau;
      try {
        SolverConfig cfg = base_cfg;
        cfg.tau = tau;
        Solution sol;
        try {
          sol = solve_steady(cfg, b);
        } catch (const ConvergenceError&) {
          if (cfg.algorithm == Algorithm::newton) throw;
          cfg.algorithm = Algorithm::newton;
          cfg.max_iter = default_max_iter(Algorithm::newton);
          sol = solve_steady(cfg, b);
          row.note = "picard-green did not converge; row solved with newton";
        }
        row.algorithm = cfg.algorithm;
        row.converged = sol.converged;
        row.slope_w_left = endpoint_slope(sol, Endpoint::left);
        row.slope_w_right = endpoint_slope(sol, Endpoint::right);
        row.beta_left = fit_boundary_exponent(sol, Endpoint::left).beta;
        row.beta_right = fit_boundary_exponent(sol, Endpoint::right).beta;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      return row;
    }));
  }
  std::vector<TauSweepRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

}  // namespace sonic
