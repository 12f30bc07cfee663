#include <algorithm>
#include <optional>

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sonic/analysis.hpp"
#include "sonic/io.hpp"
#include "sonic/pipeline.hpp"
#include "sonic/solver.hpp"
#include "sonic/transform.hpp"

namespace py = pybind11;
using namespace sonic;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Solution solution_from(const std::vector<double>& x, const std::vector<double>& rho, const std::vector<double>& w) {
  if (x.size() != rho.size() || x.size() != w.size()) throw InvalidInput("x, rho and w must have equal length");
  Solution s;
  s.grid = Grid::from_nodes(x);
  s.rho = rho;
  s.w = w;
  s.converged = true;
  return s;
}

}  // namespace

PYBIND11_MODULE(sonic_ep, m) {
  m.doc() = "Steady Euler-Poisson solver with sonic boundary";
  m.attr("__version__") = SONIC_VERSION;

  auto domain_error = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  auto invalid_input = py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConvergenceError& e) {
      py::object cls = py::module_::import("sonic_ep").attr("ConvergenceError");
      py::object err = cls(e.what());
      err.attr("residual_history") = e.residual_history();
      err.attr("iterations") = e.iterations();
      PyErr_SetObject(cls.ptr(), err.ptr());
    } catch (const NumericError& e) {
      py::object cls = py::module_::import("sonic_ep").attr("NumericError");
      py::object err = cls(e.what());
      err.attr("residual_history") = e.residual_history();
      PyErr_SetObject(cls.ptr(), err.ptr());
    }
  });
  py::object numeric = py::reinterpret_steal<py::object>(
      PyErr_NewException("sonic_ep.NumericError", PyExc_RuntimeError, nullptr));
  m.attr("NumericError") = numeric;
  m.attr("ConvergenceError") = py::reinterpret_steal<py::object>(
      PyErr_NewException("sonic_ep.ConvergenceError", numeric.ptr(), nullptr));
  (void)domain_error;
  (void)invalid_input;

  m.def("F", py::vectorize(static_cast<double (*)(double)>(&F)), py::arg("rho"), "w = ln(rho) + 1/(2 rho^2)");
  m.def("F_prime", py::vectorize(&F_prime), py::arg("rho"));
  m.def("f", py::vectorize([](double w) { return f(w); }), py::arg("w"), "Inverse of F on rho >= 1");
  m.def("f_prime", py::vectorize([](double w) { return f_prime(w); }), py::arg("w"));

  py::enum_<Algorithm>(m, "Algorithm")
      .value("picard_green", Algorithm::picard_green)
      .value("newton", Algorithm::newton);
  py::enum_<BoundaryMode>(m, "BoundaryMode")
      .value("sonic", BoundaryMode::sonic)
      .value("subsonic", BoundaryMode::subsonic);
  py::enum_<Endpoint>(m, "Endpoint").value("left", Endpoint::left).value("right", Endpoint::right);
  py::enum_<Verdict>(m, "Verdict")
      .value("bounded", Verdict::bounded)
      .value("divergent", Verdict::divergent)
      .value("inconclusive", Verdict::inconclusive);

  py::class_<DopingProfile>(m, "DopingProfile")
      .def_static("constant", &DopingProfile::constant, py::arg("value"))
      .def_static("piecewise", &DopingProfile::piecewise, py::arg("breaks"), py::arg("values"))
      .def_static("sine", &DopingProfile::sine, py::arg("base"), py::arg("amplitude"), py::arg("frequency"))
      .def_static("tabulated", &DopingProfile::tabulated, py::arg("x"), py::arg("y"))
      .def("__call__", [](const DopingProfile& b, double x) { return b(x); }, py::arg("x"))
      .def(
          "__call__",
          [](const DopingProfile& b, py::array_t<double, py::array::c_style | py::array::forcecast> x) {
            py::array_t<double> out(x.request().shape);
            const double* in = x.data();
            double* o = out.mutable_data();
            for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = b(in[i]);
            return out;
          },
          py::arg("x"))
      .def_property_readonly("b_inf", &DopingProfile::b_inf)
      .def_property_readonly("b_sup", &DopingProfile::b_sup)
      .def("__repr__", &DopingProfile::describe);

  py::class_<Grid>(m, "Grid")
      .def_static("uniform", &Grid::uniform, py::arg("n_cells"))
      .def_static("clustered", &Grid::clustered, py::arg("n_cells"))
      .def_property_readonly("nodes", [](const Grid& g) { return as_array(g.nodes()); })
      .def_property_readonly("n_cells", &Grid::n_cells)
      .def("__len__", &Grid::size);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init([](double tau, std::size_t n, const std::string& grading, Algorithm algorithm,
                       std::optional<double> rho_b, double tol, std::optional<int> max_iter, double damping) {
             SolverConfig c;
             c.tau = tau;
             if (grading == "clustered") c.grid = Grid::clustered(n);
             else if (grading == "uniform") c.grid = Grid::uniform(n);
             else throw InvalidInput("grading must be 'clustered' or 'uniform'");
             c.algorithm = algorithm;
             if (rho_b) {
               c.boundary = BoundaryMode::subsonic;
               c.rho_b = *rho_b;
             }
             c.tol_residual = tol;
             c.max_iter = max_iter ? *max_iter : default_max_iter(algorithm);
             c.damping = damping;
             return c;
           }),
           py::arg("tau") = 1.0, py::arg("n") = 1024, py::arg("grading") = "clustered",
           py::arg("algorithm") = Algorithm::picard_green, py::arg("rho_b") = py::none(),
           py::arg("tol") = 1e-12, py::arg("max_iter") = py::none(), py::arg("damping") = 0.8)
      .def_readwrite("tau", &SolverConfig::tau)
      .def_readwrite("algorithm", &SolverConfig::algorithm)
      .def_readwrite("boundary", &SolverConfig::boundary)
      .def_readwrite("rho_b", &SolverConfig::rho_b)
      .def_readwrite("grid", &SolverConfig::grid)
      .def_readwrite("tol", &SolverConfig::tol_residual)
      .def_readwrite("max_iter", &SolverConfig::max_iter)
      .def_readwrite("damping", &SolverConfig::damping);

  m.def("validate_config", &validate_config, py::arg("cfg"), py::arg("b"));

  py::class_<Solution>(m, "Solution")
      .def_property_readonly("x", [](const Solution& s) { return as_array(s.grid.nodes()); })
      .def_property_readonly("rho", [](const Solution& s) { return as_array(s.rho); })
      .def_property_readonly("w", [](const Solution& s) { return as_array(s.w); })
      .def_property_readonly("E", [](const Solution& s) { return as_array(s.E); })
      .def_readonly("grid", &Solution::grid)
      .def_readonly("iterations", &Solution::iterations)
      .def_readonly("final_residual", &Solution::final_residual)
      .def_readonly("converged", &Solution::converged)
      .def_readonly("residual_history", &Solution::residual_history)
      .def_readonly("warnings", &Solution::warnings);

  m.def(
      "solve_steady", [](const SolverConfig& cfg, const DopingProfile& b) { return solve_steady(cfg, b); },
      py::arg("cfg"), py::arg("b"), py::call_guard<py::gil_scoped_release>());
  m.def("solution_from_fields", &solution_from, py::arg("x"), py::arg("rho"), py::arg("w"),
        "Wraps given nodal fields as a Solution for the analyses");
  m.def("recover_E_flux", [](const Solution& s, double tau) { return as_array(recover_E_flux(s, tau)); },
        py::arg("sol"), py::arg("tau"));
  m.def("recover_E_poisson",
        [](const Solution& s, const DopingProfile& b, double e0) { return as_array(recover_E_poisson(s, b, e0)); },
        py::arg("sol"), py::arg("b"), py::arg("E0"));
  m.def("weak_residual", [](const Solution& s, const DopingProfile& b, double tau,
                            int n_test) { return weak_residual(s, b, tau, n_test).max_abs; },
        py::arg("sol"), py::arg("b"), py::arg("tau"), py::arg("n_test") = 8);

  py::class_<ExponentFit>(m, "ExponentFit")
      .def_readonly("beta", &ExponentFit::beta)
      .def_readonly("amplitude", &ExponentFit::amplitude)
      .def_readonly("fit_quality", &ExponentFit::fit_quality);
  py::class_<BarrierCheck>(m, "BarrierCheck")
      .def_readonly("m_empirical", &BarrierCheck::m_empirical)
      .def_readonly("beta_empirical", &BarrierCheck::beta_empirical)
      .def_readonly("upper_ok", &BarrierCheck::upper_ok);
  py::class_<SandwichCheck>(m, "SandwichCheck")
      .def_readonly("C1", &SandwichCheck::C1)
      .def_readonly("C2", &SandwichCheck::C2)
      .def_readonly("ok", &SandwichCheck::ok);
  py::class_<RefinementStudy>(m, "RefinementStudy")
      .def_readonly("levels", &RefinementStudy::levels)
      .def_readonly("values", &RefinementStudy::values)
      .def_readonly("growth_ratios", &RefinementStudy::growth_ratios)
      .def_readonly("verdict", &RefinementStudy::verdict);
  py::class_<TauSweepRow>(m, "TauSweepRow")
      .def_readonly("tau", &TauSweepRow::tau)
      .def_readonly("slope_w_left", &TauSweepRow::slope_w_left)
      .def_readonly("slope_w_right", &TauSweepRow::slope_w_right)
      .def_readonly("beta_left", &TauSweepRow::beta_left)
      .def_readonly("beta_right", &TauSweepRow::beta_right)
      .def_readonly("converged", &TauSweepRow::converged)
      .def_readonly("algorithm", &TauSweepRow::algorithm)
      .def_readonly("note", &TauSweepRow::note)
      .def_readonly("error", &TauSweepRow::error);

  m.def(
      "fit_boundary_exponent",
      [](const Solution& s, Endpoint e, std::optional<std::pair<double, double>> window) {
        if (!window) return fit_boundary_exponent(s, e);
        return fit_boundary_exponent(s, e, FitWindow{window->first, window->second, 4});
      },
      py::arg("sol"), py::arg("endpoint"), py::arg("window") = py::none());
  m.def("holder_seminorm", &holder_seminorm, py::arg("sol"), py::arg("nu"));
  m.def("sobolev_integral", [](const Solution& s, double p) { return sobolev_integral(s, p).interior; },
        py::arg("sol"), py::arg("p"));
  m.def("endpoint_slope", &endpoint_slope, py::arg("sol"), py::arg("endpoint"));
  m.def("barrier_check", &barrier_check, py::arg("sol"), py::arg("b"));
  m.def(
      "sandwich_check",
      [](const Solution& s, std::pair<double, double> window, Endpoint e) {
        return sandwich_check(s, FitWindow{window.first, window.second, 4}, e);
      },
      py::arg("sol"), py::arg("window"), py::arg("endpoint") = Endpoint::right);
  m.def("classify_refinement", &classify_refinement, py::arg("levels"), py::arg("values"));
  m.def(
      "tau_sweep",
      [](const DopingProfile& b, const std::vector<double>& taus, const SolverConfig& cfg) {
        return tau_sweep(b, taus, cfg);
      },
      py::arg("b"), py::arg("taus"), py::arg("cfg"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "analyze",
      [](const Solution& s, const SolverConfig& cfg, const DopingProfile& b, bool refinement) {
        AnalysisOptions opts;
        opts.refinement = refinement;
        const auto a = analyze(s, cfg, b, opts);
        py::dict verdicts, failures;
        for (const auto& [k, v] : a.report.verdicts) verdicts[py::str(k)] = v;
        for (const auto& [k, v] : a.report.failures) failures[py::str(k)] = v;
        py::dict out;
        out["beta_right"] = a.report.exponent_right.beta;
        out["beta_left"] = a.report.exponent_left.beta;
        out["slope_w_right"] = a.report.slope_w_right;
        out["slope_w_left"] = a.report.slope_w_left;
        out["verdicts"] = verdicts;
        out["failures"] = failures;
        return out;
      },
      py::arg("sol"), py::arg("cfg"), py::arg("b"), py::arg("refinement") = true);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("solver", &ExperimentConfig::solver)
      .def_readonly("doping", &ExperimentConfig::doping)
      .def_readonly("convergence_n0", &ExperimentConfig::convergence_n0);
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("canonical_config", &canonical_config, py::arg("cfg"));
  m.def("config_digest", &config_digest, py::arg("cfg"));
}
