#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sonic/core_types.hpp"

namespace sonic {

/// Snapshot handed to a Picard observer after every accepted iterate.
/// Invariant: 1/2 <= lower_envelope <= w_current <= upper_envelope nodewise.
struct PicardState {
  int iteration = 0;
  double damping = 0.0;
  std::vector<double> w_current;
  std::vector<double> residual_history;
  std::vector<double> lower_envelope;
  std::vector<double> upper_envelope;
};

using PicardObserver = std::function<void(const PicardState&)>;

/// Interior sonic-subsonic (or subsonic-boundary) steady state of
///   w_xx = rho - b - (1/(tau rho))_x,  w = F(rho),
/// solved for w on cfg.grid. picard-green iterates the Green's map of
/// -d^2/dx^2 + f'(w) with damping and residual line search; newton uses the
/// tridiagonal Jacobian. Throws InvalidInput when validate_config fails,
/// ConvergenceError when max_iter is exhausted.
Solution solve_steady(const SolverConfig& cfg, const DopingProfile& b,
                      const PicardObserver& observer = {});

/// Nodal residual of the discrete weak form with hat test functions phi_i:
///   [w_x]_{i-1/2}^{i+1/2} + mean_R(g) - mean_L(g) - int (rho - b) phi_i,  g = 1/(tau rho),
/// with cell integrals by Simpson's rule at a cubic midpoint value of w.
/// Input is w - 1/2 per node. Boundary entries are zero.
std::vector<double> discrete_residual(const Grid& grid, const std::vector<double>& w_excess,
                                      const DopingProfile& b, double tau);

/// E = w_x + 1/(tau rho) with a high-order discrete w_x.
std::vector<double> recover_E_flux(const Solution& sol, double tau);

/// E = E0 + integral_0^x (rho - b) by the composite trapezoid rule.
std::vector<double> recover_E_poisson(const Solution& sol, const DopingProfile& b, double E0);

struct WeakResidual {
  std::vector<std::pair<int, double>> per_testfunction;
  double max_abs = 0.0;
};

/// Left side of the integral identity
///   int [ (rho+1)/(2 rho^3) [(rho-1)^2]_x + 1/(tau rho) ] phi_x + int (rho - b) phi = 0
/// for phi_k = sin(k pi x), k = 1..n_test. s = (rho-1)^2 is reconstructed by local
/// cubics through the nodes and integrated with 5-point Gauss rules per cell.
WeakResidual weak_residual(const Solution& sol, const DopingProfile& b, double tau, int n_test);

}  // namespace sonic
