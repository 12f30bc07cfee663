#pragma once

// Small numerical kernels shared by the solver and the analyses.

#include <cstddef>
#include <span>
#include <vector>

#include "sonic/core_types.hpp"

namespace sonic::discrete {

/// Fornberg weights for the first derivative at `at` from values at `stencil`.
std::vector<double> first_derivative_weights(double at, std::span<const double> stencil);

/// Lagrange interpolation weights at `at` for values given at `stencil`.
std::vector<double> interpolation_weights(double at, std::span<const double> stencil);

/// Nodal first derivative on an arbitrary grid: 5-point stencils in the
/// interior (shifted inward next to the boundary), 4-point one-sided stencils
/// at the two endpoints.
std::vector<double> nodal_derivative(const Grid& grid, std::span<const double> values);

/// Nodal first derivative of a field that expands in powers of sqrt(d), d the
/// distance to the nearer endpoint: the nodal_derivative stencils applied in
/// t = sqrt(d). At an endpoint, the d-coefficient is extrapolated from the
/// quotients (v_k - v_end)/d_k at the four nearest nodes.
std::vector<double> nodal_derivative_sqrt_ends(const Grid& grid, std::span<const double> values);

/// Three-point second difference at interior nodes (endpoints copied from
/// their neighbours).
std::vector<double> second_difference(const Grid& grid, std::span<const double> values);

/// Solves the tridiagonal system lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// lower[0] and upper[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Cumulative composite trapezoid rule: out[i] = integral of values from x_0 to x_i.
std::vector<double> cumulative_trapezoid(const Grid& grid, std::span<const double> values);

/// Dual-cell length (x_{i+1} - x_{i-1})/2 at interior nodes, half-cells at the ends.
std::vector<double> dual_volumes(const Grid& grid);

}  // namespace sonic::discrete
