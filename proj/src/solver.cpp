#include "sonic/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "sonic/discrete.hpp"
#include "sonic/transform.hpp"

namespace sonic {

namespace {

constexpr double pi = std::numbers::pi;

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> densities(const std::vector<double>& v, double offset) {
  std::vector<double> rho(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) rho[i] = f_from_excess(v[i] + offset);
  return rho;
}

// Hat-function weak form on a fixed grid. With w piecewise defined by its
// nodal values, the two-cell identity
//   [w_x]_{i-1/2}^{i+1/2} + mean_R(g) - mean_L(g) = int (rho - b) phi_i
// is exact; cell integrals use Simpson's rule with a cubic Lagrange midpoint
// value of w.
class Discretization {
public:
  Discretization(const Grid& grid, const DopingProfile& b, double tau, double offset)
      : grid_(grid), tau_(tau), offset_(offset), n_(grid.size()) {
    if (n_ < 5) throw InvalidInput("discretization needs at least four cells");
    b_node_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) b_node_[i] = b(grid_[i]);
    const std::size_t cells = n_ - 1;
    b_mid_.resize(cells);
    first_.resize(cells);
    weight_.resize(cells);
    const auto& x = grid_.nodes();
    for (std::size_t c = 0; c < cells; ++c) {
      const double xm = 0.5 * (x[c] + x[c + 1]);
      b_mid_[c] = b(xm);
      first_[c] = std::clamp<std::size_t>(c >= 1 ? c - 1 : 0, 0, n_ - 4);
      auto w = discrete::interpolation_weights(xm, std::span<const double>(x).subspan(first_[c], 4));
      std::copy(w.begin(), w.end(), weight_[c].begin());
    }
  }

  struct CellState {
    std::vector<double> rho;      // nodal densities
    std::vector<double> rho_mid;  // cell-midpoint densities
    std::vector<double> u_mid;    // cell-midpoint excess, offset included
    std::vector<bool> cubic;      // false where the cubic midpoint fell below 1/2
  };

  CellState state(const std::vector<double>& v) const {
    CellState st;
    st.rho = densities(v, offset_);
    const std::size_t cells = n_ - 1;
    st.rho_mid.resize(cells);
    st.u_mid.resize(cells);
    st.cubic.assign(cells, true);
    for (std::size_t c = 0; c < cells; ++c) {
      double um = offset_;
      for (std::size_t m = 0; m < 4; ++m) um += weight_[c][m] * v[first_[c] + m];
      if (!(um >= 0.0)) {
        um = 0.5 * (v[c] + v[c + 1]) + offset_;
        st.cubic[c] = false;
      }
      st.u_mid[c] = um;
      st.rho_mid[c] = f_from_excess(um);
    }
    return st;
  }

  // Everything except the w-flux difference: mean_R(g) - mean_L(g) - int (rho - b) phi_i.
  std::vector<double> load(const CellState& st) const {
    std::vector<double> out(n_, 0.0);
    const std::size_t cells = n_ - 1;
    for (std::size_t c = 0; c < cells; ++c) {
      const double h = grid_.spacing(c);
      const double g_mean =
          (1.0 / st.rho[c] + 4.0 / st.rho_mid[c] + 1.0 / st.rho[c + 1]) / (6.0 * tau_);
      const double q_mid = st.rho_mid[c] - b_mid_[c];
      out[c] += g_mean - h / 6.0 * ((st.rho[c] - b_node_[c]) + 2.0 * q_mid);
      out[c + 1] -= g_mean + h / 6.0 * ((st.rho[c + 1] - b_node_[c + 1]) + 2.0 * q_mid);
    }
    out.front() = out.back() = 0.0;
    return out;
  }

  std::vector<double> residual(const std::vector<double>& v) const {
    auto r = load(state(v));
    for (std::size_t i = 1; i + 1 < n_; ++i) {
      const double hl = grid_.spacing(i - 1), hr = grid_.spacing(i);
      r[i] += (v[i + 1] - v[i]) / hr - (v[i] - v[i - 1]) / hl;
    }
    return r;
  }

  // Tridiagonal part of the residual Jacobian over the interior unknowns.
  // Midpoint couplings reaching two nodes away are dropped.
  void jacobian(const std::vector<double>& v, std::vector<double>& lower, std::vector<double>& diag,
                std::vector<double>& upper) const {
    const CellState st = state(v);
    const std::size_t m = n_ - 2;
    lower.assign(m, 0.0);
    diag.assign(m, 0.0);
    upper.assign(m, 0.0);
    auto add = [&](std::size_t row, std::size_t col, double val) {
      if (row == 0 || row + 1 >= n_ || col == 0 || col + 1 >= n_) return;
      if (col + 1 == row) lower[row - 1] += val;
      else if (col == row) diag[row - 1] += val;
      else if (col == row + 1) upper[row - 1] += val;
    };
    std::vector<double> fp(n_, 0.0);
    for (std::size_t i = 1; i + 1 < n_; ++i) fp[i] = f_prime_from_excess(v[i] + offset_);
    for (std::size_t c = 0; c + 1 < n_; ++c) {
      const double h = grid_.spacing(c);
      add(c, c, -1.0 / h);
      add(c, c + 1, 1.0 / h);
      add(c + 1, c + 1, -1.0 / h);
      add(c + 1, c, 1.0 / h);
      // Nodal dependence.
      for (std::size_t k : {c, c + 1}) {
        if (k == 0 || k + 1 >= n_) continue;
        const double dg = -fp[k] / (tau_ * st.rho[k] * st.rho[k]) / 6.0;
        add(c, k, dg);
        add(c + 1, k, -dg);
        add(k, k, -h / 6.0 * fp[k]);
      }
      // Midpoint dependence.
      const double um = st.u_mid[c];
      const double fpm = um > 0.0 ? f_prime_from_excess(um) : 0.0;
      const double dgm = -4.0 * fpm / (tau_ * st.rho_mid[c] * st.rho_mid[c]) / 6.0;
      const double dq = 2.0 * h / 6.0 * fpm;
      for (std::size_t mm = 0; mm < 4; ++mm) {
        std::size_t j;
        double a;
        if (st.cubic[c]) {
          j = first_[c] + mm;
          a = weight_[c][mm];
        } else {
          if (mm > 1) break;
          j = c + mm;
          a = 0.5;
        }
        add(c, j, a * (dgm - dq));
        add(c + 1, j, a * (-dgm - dq));
      }
    }
  }

  std::size_t size() const { return n_; }

private:
  Grid grid_;
  double tau_;
  double offset_;
  std::size_t n_;
  std::vector<double> b_node_;
  std::vector<double> b_mid_;
  std::vector<std::size_t> first_;
  std::vector<std::array<double, 4>> weight_;
};

// Unknown is v = w - w_boundary.
class SteadyProblem {
public:
  SteadyProblem(const SolverConfig& cfg, const DopingProfile& b)
      : grid_(cfg.grid),
        n_(cfg.grid.size()),
        rho_boundary_(cfg.boundary_density()),
        u_boundary_(F_excess(rho_boundary_)),
        u_upper_(std::max(F_excess(b.b_sup()), u_boundary_)),
        disc_(cfg.grid, b, cfg.tau, u_boundary_) {}

  std::size_t size() const { return n_; }
  double u_boundary() const { return u_boundary_; }
  double u_upper() const { return u_upper_; }
  const Grid& grid() const { return grid_; }

  std::vector<double> initial_guess(double m0) const {
    std::vector<double> u(n_);
    for (std::size_t i = 0; i < n_; ++i)
      u[i] = F_excess(rho_boundary_ + m0 * std::sin(pi * grid_[i])) - u_boundary_;
    u.front() = u.back() = 0.0;
    return u;
  }

  std::vector<double> residual(const std::vector<double>& u) const { return disc_.residual(u); }

  // One Newton direction: J du = -R.
  std::vector<double> newton_direction(const std::vector<double>& u,
                                       const std::vector<double>& r) const {
    std::vector<double> lower, diag, upper;
    disc_.jacobian(u, lower, diag, upper);
    std::vector<double> rhs(n_ - 2);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = -r[k + 1];
    auto d = discrete::solve_tridiagonal(lower, diag, upper, rhs);
    std::vector<double> du(n_, 0.0);
    std::copy(d.begin(), d.end(), du.begin() + 1);
    return du;
  }

  // Fixed-point map u -> G_sigma (load(u) + sigma u), where G_sigma is the Green's
  // function of -d^2/dx^2 + sigma with zero Dirichlet data and sigma = f'(w) is
  // frozen at u. The tau term enters through cell means of 1/(tau rho) only, so
  // rho is never differentiated.
  std::vector<double> shifted_green_map(const std::vector<double>& u) const {
    const auto load = disc_.load(disc_.state(u));
    const std::size_t m = n_ - 2;
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      const double hl = grid_.spacing(i - 1), hr = grid_.spacing(i);
      const double excess = u[i] + u_boundary_;
      const double sigma = excess > 0.0 ? 0.5 * (hl + hr) * f_prime_from_excess(excess) : 0.0;
      lower[k] = -1.0 / hl;
      upper[k] = -1.0 / hr;
      diag[k] = 1.0 / hl + 1.0 / hr + sigma;
      rhs[k] = load[i] + sigma * u[i];
    }
    const auto x = discrete::solve_tridiagonal(lower, diag, upper, rhs);
    std::vector<double> out(n_, 0.0);
    std::copy(x.begin(), x.end(), out.begin() + 1);
    return out;
  }

private:
  Grid grid_;
  std::size_t n_;
  double rho_boundary_;
  double u_boundary_;
  double u_upper_;
  Discretization disc_;
};

Solution finish(const SolverConfig& cfg, const SteadyProblem& prob, const std::vector<double>& v,
                int iterations, double residual, std::vector<double> history) {
  Solution sol;
  sol.grid = cfg.grid;
  const std::size_t n = v.size();
  const double ub = prob.u_boundary();
  sol.rho.resize(n);
  sol.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.rho[i] = f_from_excess(v[i] + ub);
    sol.w[i] = (0.5 + ub) + v[i];
    if (sol.rho[i] < 1.0 - 1e-9)
      throw NumericError("solution left the subsonic branch at x = " + num(cfg.grid[i]), history);
  }
  const double rb = cfg.boundary_density();
  sol.rho.front() = sol.rho.back() = rb;
  sol.w.front() = sol.w.back() = cfg.boundary == BoundaryMode::sonic ? 0.5 : F(rb);
  sol.iterations = iterations;
  sol.final_residual = residual;
  sol.converged = true;
  sol.residual_history = std::move(history);
  sol.E = recover_E_flux(sol, cfg.tau);
  return sol;
}

Solution solve_newton(const SolverConfig& cfg, const SteadyProblem& prob, std::vector<double> u) {
  std::vector<double> history;
  std::vector<double> r = prob.residual(u);
  double rn = max_abs(r);
  history.push_back(rn);
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (rn <= cfg.tol_residual) return finish(cfg, prob, u, it, rn, std::move(history));
    const auto du = prob.newton_direction(u, r);
    const double level = max_abs(du);
    double alpha = cfg.damping;
    bool accepted = false;
    for (int halving = 0; halving < 40 && !accepted; ++halving, alpha *= 0.5) {
      std::vector<double> trial(u);
      const double ub = prob.u_boundary();
      for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        trial[i] = u[i] + alpha * du[i];
        // Keep w strictly above 1/2: move at most halfway to the sonic value.
        if (!(trial[i] + ub > 0.5 * (u[i] + ub))) trial[i] = 0.5 * (u[i] + ub) - ub;
      }
      auto rt = prob.residual(trial);
      double rtn = max_abs(rt);
      // Accept on a smaller residual or a smaller Newton correction (natural monotonicity).
      if (rtn < rn || max_abs(prob.newton_direction(u, rt)) < level) {
        u = std::move(trial);
        r = std::move(rt);
        rn = rtn;
        accepted = true;
      }
    }
    history.push_back(rn);
    if (!accepted) {
      if (rn <= cfg.tol_residual) return finish(cfg, prob, u, it + 1, rn, std::move(history));
      throw ConvergenceError("newton: line search stalled at residual " + num(rn), history, it + 1);
    }
  }
  if (rn <= cfg.tol_residual) return finish(cfg, prob, u, cfg.max_iter, rn, std::move(history));
  throw ConvergenceError("newton: no convergence after " + std::to_string(cfg.max_iter) +
                             " iterations (residual " + num(rn) + ")",
                         history, cfg.max_iter);
}

Solution solve_picard(const SolverConfig& cfg, const SteadyProblem& prob, std::vector<double> u,
                      const PicardObserver& observer) {
  const std::size_t n = prob.size();
  PicardState state;
  state.lower_envelope.assign(n, 0.5);
  state.upper_envelope.assign(n, 0.5 + prob.u_upper());
  state.lower_envelope.front() = state.lower_envelope.back() = 0.5 + prob.u_boundary();
  state.upper_envelope.front() = state.upper_envelope.back() = 0.5 + prob.u_boundary();

  auto clamp_to_bracket = [&](std::vector<double>& v) {
    const double ub = prob.u_boundary();
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] = std::clamp(v[i], -ub, prob.u_upper() - ub);
  };
  clamp_to_bracket(u);

  double theta = cfg.damping;
  double rn = max_abs(prob.residual(u));
  state.residual_history.push_back(rn);
  std::vector<double> trial(n);
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (rn <= cfg.tol_residual)
      return finish(cfg, prob, u, it, rn, std::move(state.residual_history));
    const auto target = prob.shifted_green_map(u);
    bool accepted = false;
    double rtn = rn;
    for (int halving = 0; halving < 12; ++halving) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = (1.0 - theta) * u[i] + theta * target[i];
      clamp_to_bracket(trial);
      rtn = max_abs(prob.residual(trial));
      if (rtn < rn) {
        accepted = true;
        break;
      }
      theta *= 0.5;
    }
    if (!accepted) {
      theta = cfg.damping;
      for (std::size_t i = 0; i < n; ++i) trial[i] = (1.0 - theta) * u[i] + theta * target[i];
      clamp_to_bracket(trial);
      rtn = max_abs(prob.residual(trial));
    }
    u = trial;
    rn = rtn;
    if (accepted) theta = std::min(cfg.damping, 2.0 * theta);
    state.residual_history.push_back(rn);
    if (observer) {
      state.iteration = it + 1;
      state.damping = theta;
      state.w_current.resize(n);
      for (std::size_t i = 0; i < n; ++i) state.w_current[i] = (0.5 + prob.u_boundary()) + u[i];
      observer(state);
    }
  }
  if (rn <= cfg.tol_residual)
    return finish(cfg, prob, u, cfg.max_iter, rn, std::move(state.residual_history));
  throw ConvergenceError("picard-green: no convergence after " + std::to_string(cfg.max_iter) +
                             " iterations (residual " + num(rn) + ")",
                         state.residual_history, cfg.max_iter);
}

}  // namespace

std::vector<double> discrete_residual(const Grid& grid, const std::vector<double>& w_excess,
                                      const DopingProfile& b, double tau) {
  if (w_excess.size() != grid.size()) throw InvalidInput("discrete_residual: size mismatch");
  return Discretization(grid, b, tau, 0.0).residual(w_excess);
}

Solution solve_steady(const SolverConfig& cfg, const DopingProfile& b,
                      const PicardObserver& observer) {
  auto errors = validate_config(cfg, b);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidInput(msg);
  }
  SteadyProblem prob(cfg, b);
  const double m0 = std::min(0.1, (b.b_inf() - 1.0) / 2.0);
  auto u0 = prob.initial_guess(m0);

  Solution sol = cfg.algorithm == Algorithm::newton ? solve_newton(cfg, prob, std::move(u0))
                                                    : solve_picard(cfg, prob, std::move(u0), observer);
  if (b.kind() == DopingProfile::Kind::constant && b.b_inf() - 1.0 < 1e-3)
    sol.warnings.push_back("doping is within 1e-3 of the sonic value; the interior solution is "
                           "nearly sonic and the bracket is thin");
  return sol;
}

std::vector<double> recover_E_flux(const Solution& sol, double tau) {
  auto wx = discrete::nodal_derivative_sqrt_ends(sol.grid, sol.w);
  for (std::size_t i = 0; i < wx.size(); ++i) wx[i] += 1.0 / (tau * sol.rho[i]);
  return wx;
}

std::vector<double> recover_E_poisson(const Solution& sol, const DopingProfile& b, double E0) {
  const std::size_t n = sol.grid.size();
  std::vector<double> src(n);
  for (std::size_t i = 0; i < n; ++i) src[i] = sol.rho[i] - b(sol.grid[i]);
  auto E = discrete::cumulative_trapezoid(sol.grid, src);
  for (double& e : E) e += E0;
  return E;
}

WeakResidual weak_residual(const Solution& sol, const DopingProfile& b, double tau, int n_test) {
  if (n_test < 1) throw InvalidInput("weak_residual: n_test must be >= 1");
  const Grid& g = sol.grid;
  const std::size_t n = g.size();
  if (n < 5) throw InvalidInput("weak_residual: need at least four cells");
  const auto& x = g.nodes();

  // s = (rho - 1)^2 by cubic interpolation through the four nodes around each
  // cell, integrated with 5-point Gauss-Legendre.
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (sol.rho[i] - 1.0) * (sol.rho[i] - 1.0);
  static constexpr std::array<double, 5> gx = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> gw = {0.2369268850561891, 0.4786286704993665,
                                               0.5688888888888889, 0.4786286704993665,
                                               0.2369268850561891};
  std::vector<double> total(n_test + 1, 0.0);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const std::size_t first = std::clamp<std::size_t>(c >= 1 ? c - 1 : 0, 0, n - 4);
    const std::span<const double> st(x.data() + first, 4);
    const double h = g.spacing(c);
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const double xq = x[c] + 0.5 * (gx[q] + 1.0) * h;
      const double wq = 0.5 * gw[q] * h;
      const auto lw = discrete::interpolation_weights(xq, st);
      const auto dw = discrete::first_derivative_weights(xq, st);
      double sq = 0.0, sx = 0.0;
      for (std::size_t m = 0; m < 4; ++m) {
        sq += lw[m] * s[first + m];
        sx += dw[m] * s[first + m];
      }
      const double rho = 1.0 + std::sqrt(std::max(sq, 0.0));
      const double flux = (rho + 1.0) / (2.0 * rho * rho * rho) * sx + 1.0 / (tau * rho);
      const double source = rho - b(xq);
      for (int k = 1; k <= n_test; ++k) {
        const double kp = k * pi;
        total[k] += wq * (flux * kp * std::cos(kp * xq) + source * std::sin(kp * xq));
      }
    }
  }
  WeakResidual out;
  for (int k = 1; k <= n_test; ++k) {
    out.per_testfunction.emplace_back(k, total[k]);
    out.max_abs = std::max(out.max_abs, std::abs(total[k]));
  }
  return out;
}

}  // namespace sonic
