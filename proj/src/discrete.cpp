#include "sonic/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sonic::discrete {

// Fornberg (1988), restricted to derivative orders 0 and 1.
std::vector<double> first_derivative_weights(double at, std::span<const double> stencil) {
  const std::size_t n = stencil.size();
  if (n < 2) throw InvalidInput("derivative stencil needs at least two points");
  std::vector<double> c0(n, 0.0), c1(n, 0.0);
  c0[0] = 1.0;
  double c_prev = 1.0;
  double x_prev = stencil[0] - at;
  for (std::size_t i = 1; i < n; ++i) {
    const double xi = stencil[i] - at;
    double c2 = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = stencil[i] - stencil[j];
      c2 *= c3;
      if (j == i - 1) {
        c1[i] = c_prev * (c0[i - 1] - x_prev * c1[i - 1]) / c2;
        c0[i] = -c_prev * x_prev * c0[i - 1] / c2;
      }
      c1[j] = (xi * c1[j] - c0[j]) / c3;
      c0[j] = xi * c0[j] / c3;
    }
    c_prev = c2;
    x_prev = xi;
  }
  return c1;
}

std::vector<double> interpolation_weights(double at, std::span<const double> stencil) {
  const std::size_t n = stencil.size();
  if (n < 1) throw InvalidInput("interpolation stencil is empty");
  std::vector<double> w(n, 1.0);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t l = 0; l < n; ++l)
      if (l != m) w[m] *= (at - stencil[l]) / (stencil[m] - stencil[l]);
  return w;
}

std::vector<double> nodal_derivative(const Grid& grid, std::span<const double> values) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw InvalidInput("nodal_derivative: size mismatch");
  if (n < 5) throw InvalidInput("nodal_derivative: need at least 4 cells");
  const auto& x = grid.nodes();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t first, count;
    if (i == 0) {
      first = 0, count = 4;
    } else if (i == n - 1) {
      first = n - 4, count = 4;
    } else {
      first = std::clamp<std::size_t>(i >= 2 ? i - 2 : 0, 0, n - 5);
      count = 5;
    }
    std::span<const double> st(x.data() + first, count);
    auto wts = first_derivative_weights(x[i], st);
    double d = 0.0;
    for (std::size_t k = 0; k < count; ++k) d += wts[k] * values[first + k];
    out[i] = d;
  }
  return out;
}

std::vector<double> nodal_derivative_sqrt_ends(const Grid& grid, std::span<const double> values) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw InvalidInput("nodal_derivative_sqrt_ends: size mismatch");
  if (n < 5) throw InvalidInput("nodal_derivative_sqrt_ends: need at least 4 cells");
  const auto& x = grid.nodes();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = 2.0 * x[i] <= x.front() + x.back();
    const double sign = left ? 1.0 : -1.0;
    auto dist = [&](std::size_t k) { return left ? x[k] - x.front() : x.back() - x[k]; };
    if (i == 0 || i == n - 1) {
      double t[4], q[4];
      for (std::size_t k = 1; k <= 4; ++k) {
        const std::size_t j = i == 0 ? k : n - 1 - k;
        t[k - 1] = std::sqrt(dist(j));
        q[k - 1] = (values[j] - values[i]) / dist(j);
      }
      const auto wts = interpolation_weights(0.0, std::span<const double>(t, 4));
      double c = 0.0;
      for (std::size_t k = 0; k < 4; ++k) c += wts[k] * q[k];
      out[i] = sign * c;
      continue;
    }
    const std::size_t first = std::clamp<std::size_t>(i >= 2 ? i - 2 : 0, 0, n - 5);
    double t[5];
    for (std::size_t k = 0; k < 5; ++k) t[k] = std::sqrt(dist(first + k));
    const double ti = std::sqrt(dist(i));
    const auto wts = first_derivative_weights(ti, std::span<const double>(t, 5));
    double d = 0.0;
    for (std::size_t k = 0; k < 5; ++k) d += wts[k] * values[first + k];
    out[i] = sign * d / (2.0 * ti);
  }
  return out;
}

std::vector<double> second_difference(const Grid& grid, std::span<const double> values) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw InvalidInput("second_difference: size mismatch");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = grid.spacing(i - 1), hr = grid.spacing(i);
    out[i] = 2.0 / (hl + hr) *
             ((values[i + 1] - values[i]) / hr - (values[i] - values[i - 1]) / hl);
  }
  out[0] = out[1];
  out[n - 1] = out[n - 2];
  return out;
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw InvalidInput("solve_tridiagonal: size mismatch");
  std::vector<double> c(n), d(n);
  double denom = diag[0];
  if (denom == 0.0) throw NumericError("solve_tridiagonal: zero pivot");
  c[0] = n > 1 ? upper[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    if (denom == 0.0) throw NumericError("solve_tridiagonal: zero pivot");
    c[i] = i + 1 < n ? upper[i] / denom : 0.0;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
  return d;
}

std::vector<double> cumulative_trapezoid(const Grid& grid, std::span<const double> values) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw InvalidInput("cumulative_trapezoid: size mismatch");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    out[i] = out[i - 1] + 0.5 * grid.spacing(i - 1) * (values[i - 1] + values[i]);
  return out;
}

std::vector<double> dual_volumes(const Grid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> v(n);
  v[0] = 0.5 * grid.spacing(0);
  v[n - 1] = 0.5 * grid.spacing(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) v[i] = 0.5 * (grid.spacing(i - 1) + grid.spacing(i));
  return v;
}

}  // namespace sonic::discrete
