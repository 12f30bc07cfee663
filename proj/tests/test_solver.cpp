#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "sonic/analysis.hpp"
#include "sonic/solver.hpp"
#include "sonic/transform.hpp"

using namespace sonic;

namespace {

SolverConfig make_cfg(std::size_t n, Algorithm a = Algorithm::picard_green, double tau = 1.0) {
  SolverConfig cfg;
  cfg.grid = Grid::clustered(n);
  cfg.algorithm = a;
  cfg.max_iter = default_max_iter(a);
  cfg.tau = tau;
  return cfg;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("canonical solve respects the a priori bounds") {
  const auto b = DopingProfile::constant(2.0);
  const auto sol = solve_steady(make_cfg(512), b);
  REQUIRE(sol.converged);
  CHECK(sol.final_residual <= 1e-12);
  CHECK(*std::max_element(sol.rho.begin(), sol.rho.end()) > 1.05);
  for (std::size_t i = 0; i < sol.rho.size(); ++i) {
    CHECK(sol.rho[i] >= 1.0);
    CHECK(sol.rho[i] <= 2.0);
    CHECK(sol.w[i] >= 0.5);
    CHECK(sol.w[i] <= F(2.0));
    CHECK(std::abs(F(sol.rho[i]) - sol.w[i]) <= 1e-12);
  }
}

TEST_CASE("sonic boundary values are exact") {
  const auto sol = solve_steady(make_cfg(128), DopingProfile::constant(2.0));
  CHECK(sol.rho.front() == 1.0);
  CHECK(sol.rho.back() == 1.0);
  CHECK(sol.w.front() == 0.5);
  CHECK(sol.w.back() == 0.5);
}

TEST_CASE("interior solution matches a fine reference from the other algorithm") {
  const auto b = DopingProfile::constant(2.0);
  const auto coarse = solve_steady(make_cfg(512), b);
  const auto fine = solve_steady(make_cfg(8192, Algorithm::newton), b);
  // Clustered grids nest: node i of N is node 16 i of 16 N.
  double m = 0.0;
  for (std::size_t i = 0; i < coarse.rho.size(); ++i) m = std::max(m, std::abs(coarse.rho[i] - fine.rho[16 * i]));
  CHECK(m < 1e-6);
}

TEST_CASE("picard-green and newton agree") {
  const auto b = DopingProfile::constant(2.0);
  for (std::size_t n : {64u, 256u}) {
    const auto p = solve_steady(make_cfg(n), b);
    const auto q = solve_steady(make_cfg(n, Algorithm::newton), b);
    CHECK(max_diff(p.rho, q.rho) <= 1e-9);
  }
}

TEST_CASE("different initial dampings reach the same discrete solution") {
  const auto b = DopingProfile::sine(2.0, 0.3, 2.0);
  auto cfg = make_cfg(128);
  const auto a = solve_steady(cfg, b);
  cfg.damping = 0.5;
  const auto c = solve_steady(cfg, b);
  cfg.algorithm = Algorithm::newton;
  cfg.damping = 1.0;
  cfg.max_iter = 50;
  const auto d = solve_steady(cfg, b);
  CHECK(max_diff(a.rho, c.rho) < 1e-10);
  CHECK(max_diff(a.rho, d.rho) < 1e-10);
}

TEST_CASE("repeated solves are bitwise identical") {
  const auto b = DopingProfile::piecewise({0.4}, {1.8, 2.6});
  const auto cfg = make_cfg(200);
  const auto a = solve_steady(cfg, b);
  const auto c = solve_steady(cfg, b);
  CHECK(a.rho == c.rho);
  CHECK(a.w == c.w);
  CHECK(a.E == c.E);
}

TEST_CASE("picard iterates stay inside the envelopes") {
  const auto b = DopingProfile::constant(2.0);
  bool ok = true;
  int calls = 0;
  solve_steady(make_cfg(256), b, [&](const PicardState& st) {
    ++calls;
    for (std::size_t i = 0; i < st.w_current.size(); ++i) {
      ok = ok && st.lower_envelope[i] >= 0.5 && st.lower_envelope[i] <= st.w_current[i] &&
           st.w_current[i] <= st.upper_envelope[i] && st.upper_envelope[i] <= F(2.0) + 1e-15;
    }
    ok = ok && st.damping > 0.0 && !st.residual_history.empty();
  });
  CHECK(calls > 0);
  CHECK(ok);
}

TEST_CASE("interior positivity stabilizes under refinement") {
  const auto b = DopingProfile::constant(2.0);
  double prev = 0.0;
  for (std::size_t n : {128u, 256u, 512u}) {
    const auto m = barrier_check(solve_steady(make_cfg(n), b), b).m_empirical;
    CHECK(m > 0.0);
    if (prev > 0.0) CHECK(std::abs(m - prev) / prev < 1e-3);
    prev = m;
  }
}

TEST_CASE("subsonic boundary yields a solution above the boundary density") {
  auto cfg = make_cfg(256);
  cfg.boundary = BoundaryMode::subsonic;
  cfg.rho_b = 1.5;
  const auto sol = solve_steady(cfg, DopingProfile::constant(2.0));
  CHECK(sol.rho.front() == 1.5);
  CHECK(sol.rho.back() == 1.5);
  CHECK(sol.w.front() == F(1.5));
  for (double r : sol.rho) {
    CHECK(r >= 1.5 - 1e-12);
    CHECK(r <= 2.0);
  }
}

TEST_CASE("invalid configurations are rejected before solving") {
  CHECK_THROWS_AS(solve_steady(make_cfg(64), DopingProfile::constant(0.9)), InvalidInput);
  auto cfg = make_cfg(64);
  cfg.tau = 0.0;
  CHECK_THROWS_AS(solve_steady(cfg, DopingProfile::constant(2.0)), InvalidInput);
}

TEST_CASE("exhausted iteration budget carries the residual history") {
  auto cfg = make_cfg(128);
  cfg.max_iter = 1;
  try {
    solve_steady(cfg, DopingProfile::constant(2.0));
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.residual_history().size() == 2);
  }
}

TEST_CASE("nearly sonic doping is solved and flagged") {
  auto cfg = make_cfg(512, Algorithm::newton);
  const auto b = DopingProfile::constant(1.0005);
  const auto sol = solve_steady(cfg, b);
  CHECK(sol.warnings.size() == 1);
  const auto m = barrier_check(sol, b).m_empirical;
  CHECK(m > 0.0);
  CHECK(m < 1e-3);
}

TEST_CASE("newton handles small relaxation times") {
  for (double tau : {0.01, 0.1}) {
    const auto sol = solve_steady(make_cfg(1024, Algorithm::newton, tau), DopingProfile::constant(2.0));
    CHECK(sol.converged);
  }
}

TEST_CASE("discrete residual vanishes at the computed solution") {
  const auto b = DopingProfile::constant(2.0);
  const auto sol = solve_steady(make_cfg(128), b);
  std::vector<double> excess(sol.w.size());
  for (std::size_t i = 0; i < excess.size(); ++i) excess[i] = sol.w[i] - 0.5;
  const auto r = discrete_residual(sol.grid, excess, b, 1.0);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == 0.0);
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  CHECK(m <= 1e-11);
}

TEST_CASE("E_flux at a sonic endpoint is w_x + 1/tau") {
  const double tau = 1.0;
  const auto sol = solve_steady(make_cfg(1024), DopingProfile::constant(2.0));
  CHECK(sol.E.back() < 1.0 / tau);
  CHECK(sol.E.back() == doctest::Approx(endpoint_slope(sol, Endpoint::right) + 1.0 / tau).epsilon(1e-2));
  CHECK(sol.E.front() == doctest::Approx(endpoint_slope(sol, Endpoint::left) + 1.0 / tau).epsilon(1e-2));
}

TEST_CASE("E_poisson of equal fields is constant") {
  Solution s;
  s.grid = Grid::clustered(32);
  s.rho.assign(s.grid.size(), 2.0);
  s.w.assign(s.grid.size(), F(2.0));
  const auto e = recover_E_poisson(s, DopingProfile::constant(2.0), 0.7);
  for (double v : e) CHECK(v == 0.7);
}

TEST_CASE("E_flux and E_poisson agree and satisfy the integral balance") {
  const auto b = DopingProfile::constant(2.0);
  double prev = 0.0;
  for (std::size_t n : {256u, 512u, 1024u}) {
    const auto sol = solve_steady(make_cfg(n), b);
    const auto flux = recover_E_flux(sol, 1.0);
    const auto poisson = recover_E_poisson(sol, b, flux.front());
    const double m = max_diff(flux, poisson);
    if (prev > 0.0) CHECK(prev / m > 1.8);
    prev = m;
    CHECK(poisson.back() - poisson.front() == doctest::Approx(flux.back() - flux.front()).epsilon(0.02));
  }
}

TEST_CASE("weak residual is small at the solution and large for a non-solution") {
  const auto b = DopingProfile::constant(2.0);
  const auto sol = solve_steady(make_cfg(512), b);
  const auto wr = weak_residual(sol, b, 1.0, 8);
  REQUIRE(wr.per_testfunction.size() == 8);
  double m = 0.0;
  for (const auto& [k, v] : wr.per_testfunction) m = std::max(m, std::abs(v));
  CHECK(wr.max_abs == m);
  CHECK(wr.max_abs <= 1e-6);

  Solution flat = sol;
  for (std::size_t i = 1; i + 1 < flat.rho.size(); ++i) {
    flat.rho[i] = 2.0;
    flat.w[i] = F(2.0);
  }
  CHECK(weak_residual(flat, b, 1.0, 8).max_abs > 1e-2);
  CHECK_THROWS_AS(weak_residual(sol, b, 1.0, 0), InvalidInput);
}

TEST_CASE("weak residual decreases under refinement") {
  const auto b = DopingProfile::constant(2.0);
  double prev = 0.0;
  for (std::size_t n : {64u, 128u, 256u, 512u}) {
    const double r = weak_residual(solve_steady(make_cfg(n), b), b, 1.0, 8).max_abs;
    if (prev > 0.0) CHECK(prev / r >= 2.0);
    prev = r;
  }
}
