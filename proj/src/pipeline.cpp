#include "sonic/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <cstdio>
#include <functional>

#include "sonic/solver.hpp"

namespace sonic {

namespace {

bool in_exponent_band(const ExponentFit& fit) {
  return fit.beta >= kExponentLow && fit.beta <= kExponentHigh && fit.fit_quality >= kMinFitQuality;
}

void guarded(RegularityReport& rep, const std::string& section, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    rep.failures.emplace_back(section, e.what());
  }
}

std::string fmt_exponent(const char* prefix, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%g", prefix, v);
  return buf;
}

}  // namespace

double e_field_mismatch(const Solution& sol, const DopingProfile& b, double tau) {
  const auto flux = recover_E_flux(sol, tau);
  const auto poisson = recover_E_poisson(sol, b, flux.front());
  double m = 0.0;
  for (std::size_t i = 0; i < flux.size(); ++i) m = std::max(m, std::abs(flux[i] - poisson[i]));
  return m;
}

RegularityAnalysis analyze(const Solution& sol, const SolverConfig& cfg, const DopingProfile& b,
                           const AnalysisOptions& opts) {
  RegularityAnalysis out;
  RegularityReport& rep = out.report;
  const bool do_left = !opts.endpoint || *opts.endpoint == Endpoint::left;
  const bool do_right = !opts.endpoint || *opts.endpoint == Endpoint::right;

  std::optional<bool> right_ok, left_ok;
  if (do_right) {
    guarded(rep, "exponent_right", [&] {
      rep.exponent_right = fit_boundary_exponent(sol, Endpoint::right);
      right_ok = in_exponent_band(rep.exponent_right);
    });
    guarded(rep, "slope_w_right", [&] { rep.slope_w_right = endpoint_slope(sol, Endpoint::right); });
    guarded(rep, "sandwich", [&] {
      out.sandwich = sandwich_check(sol, default_fit_window(sol, Endpoint::right), Endpoint::right);
      rep.sandwich_c1 = out.sandwich.C1;
      rep.sandwich_c2 = out.sandwich.C2;
    });
  }
  if (do_left) {
    guarded(rep, "exponent_left", [&] {
      rep.exponent_left = fit_boundary_exponent(sol, Endpoint::left);
      left_ok = in_exponent_band(rep.exponent_left);
    });
    guarded(rep, "slope_w_left", [&] { rep.slope_w_left = endpoint_slope(sol, Endpoint::left); });
  }
  guarded(rep, "barrier", [&] {
    out.barrier = barrier_check(sol, b);
    rep.barrier_beta = out.barrier.beta_empirical;
  });

  const std::size_t n_sol = sol.grid.n_cells();
  for (double p : opts.ps)
    guarded(rep, fmt_exponent("sobolev_p", p),
            [&] { rep.sobolev_table.push_back({p, n_sol, sobolev_integral(sol, p).interior}); });
  for (double nu : opts.nus)
    guarded(rep, fmt_exponent("holder_nu", nu),
            [&] { rep.holder_table.push_back({nu, n_sol, holder_seminorm(sol, nu)}); });

  std::optional<bool> holder_ok, sobolev_ok;
  if (opts.refinement) {
    guarded(rep, "refinement", [&] {
      const auto levels = doubling_levels(opts.study_n0, opts.study_doublings);
      std::vector<double> ps = opts.ps, nus = opts.nus;
      for (double p : {1.5, 2.0})
        if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
      for (double nu : {0.5, 0.75})
        if (std::find(nus.begin(), nus.end(), nu) == nus.end()) nus.push_back(nu);
      std::vector<std::vector<double>> sob(ps.size()), hol(nus.size());
      for (std::size_t n : levels) {
        SolverConfig c = cfg;
        c.grid = Grid::make(cfg.grid.grading(), n);
        const Solution s = solve_steady(c, b);
        for (std::size_t k = 0; k < ps.size(); ++k) {
          sob[k].push_back(sobolev_integral(s, ps[k]).interior);
          rep.sobolev_table.push_back({ps[k], n, sob[k].back()});
        }
        for (std::size_t k = 0; k < nus.size(); ++k) {
          hol[k].push_back(holder_seminorm(s, nus[k]));
          rep.holder_table.push_back({nus[k], n, hol[k].back()});
        }
      }
      auto study_of = [&](const std::vector<double>& keys, const std::vector<std::vector<double>>& vals,
                          double key) -> const std::vector<double>& {
        return vals[std::find(keys.begin(), keys.end(), key) - keys.begin()];
      };
      for (std::size_t k = 0; k < ps.size(); ++k)
        out.studies.push_back({fmt_exponent("sobolev_p", ps[k]), classify_refinement(levels, sob[k])});
      for (std::size_t k = 0; k < nus.size(); ++k)
        out.studies.push_back({fmt_exponent("holder_nu", nus[k]), classify_refinement(levels, hol[k])});

      const auto half = classify_refinement(levels, study_of(nus, hol, 0.5));
      const auto three_q = classify_refinement(levels, study_of(nus, hol, 0.75));
      const bool half_bounded = std::all_of(half.growth_ratios.begin(), half.growth_ratios.end(),
                                            [](double r) { return r <= kHolderBoundedRatio; });
      const bool three_q_grows =
          std::all_of(three_q.growth_ratios.begin(), three_q.growth_ratios.end(),
                      [](double r) { return r > 1.0; }) &&
          three_q.values.back() >= kHolderDivergentGrowth * three_q.values.front();
      holder_ok = half_bounded && three_q_grows;

      const auto p15 = classify_refinement(levels, study_of(ps, sob, 1.5));
      const auto p2 = classify_refinement(levels, study_of(ps, sob, 2.0));
      sobolev_ok = p15.verdict == Verdict::bounded && p2.verdict == Verdict::divergent;
    });
  }

  if (holder_ok) rep.verdicts.emplace_back("holder_half", *holder_ok);
  if (sobolev_ok) rep.verdicts.emplace_back("sobolev_sub2", *sobolev_ok);
  if (right_ok) rep.verdicts.emplace_back("right_singularity", *right_ok);
  if (left_ok) rep.verdicts.emplace_back("left_singularity", *left_ok);
  return out;
}

ConvergenceStudy convergence_study(const SolverConfig& cfg, const DopingProfile& b, std::size_t n0,
                                   std::size_t doublings) {
  if (doublings < 3) throw InvalidInput("convergence study needs at least 3 doublings");
  if (n0 < 4) throw InvalidInput("convergence study needs a base level of at least 4 cells");
  ConvergenceStudy out;
  const auto levels = doubling_levels(n0, doublings);
  std::vector<double> wr, s15, s2, h5, h75, em;
  for (std::size_t n : levels) {
    SolverConfig c = cfg;
    c.grid = Grid::make(cfg.grid.grading(), n);
    const Solution s = solve_steady(c, b);
    ConvergenceRow row;
    row.n = n;
    row.weak_residual = weak_residual(s, b, cfg.tau, 8).max_abs;
    row.sobolev_p15 = sobolev_integral(s, 1.5).interior;
    row.sobolev_p2 = sobolev_integral(s, 2.0).interior;
    row.holder_half = holder_seminorm(s, 0.5);
    row.holder_three_quarters = holder_seminorm(s, 0.75);
    row.e_mismatch = e_field_mismatch(s, b, cfg.tau);
    out.rows.push_back(row);
    wr.push_back(row.weak_residual);
    s15.push_back(row.sobolev_p15);
    s2.push_back(row.sobolev_p2);
    h5.push_back(row.holder_half);
    h75.push_back(row.holder_three_quarters);
    em.push_back(row.e_mismatch);
  }
  out.studies = {{"weak_residual", classify_refinement(levels, wr)},
                 {"sobolev_p1.5", classify_refinement(levels, s15)},
                 {"sobolev_p2", classify_refinement(levels, s2)},
                 {"holder_nu0.5", classify_refinement(levels, h5)},
                 {"holder_nu0.75", classify_refinement(levels, h75)},
                 {"e_mismatch", classify_refinement(levels, em)}};
  return out;
}

}  // namespace sonic
