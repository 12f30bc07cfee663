#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sonic/discrete.hpp"

using namespace sonic;

TEST_CASE("interpolation weights reproduce cubics") {
  const std::vector<double> xs = {0.0, 0.1, 0.35, 0.6};
  const auto w = discrete::interpolation_weights(0.2, xs);
  double sum = 0.0, cubic = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sum += w[k];
    cubic += w[k] * (xs[k] * xs[k] * xs[k] - 2.0 * xs[k]);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cubic == doctest::Approx(0.008 - 0.4).epsilon(1e-13));
}

TEST_CASE("first derivative weights are exact for polynomials of the stencil degree") {
  const std::vector<double> xs = {0.0, 0.05, 0.2, 0.3, 0.5};
  const auto w = discrete::first_derivative_weights(0.1, xs);
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) d += w[k] * std::pow(xs[k], 4);
  CHECK(d == doctest::Approx(4.0 * std::pow(0.1, 3)).epsilon(1e-10));
}

TEST_CASE("nodal derivative of a smooth function converges on a clustered grid") {
  auto err = [](std::size_t n) {
    const auto g = Grid::clustered(n);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::sin(3.0 * g[i]);
    const auto d = discrete::nodal_derivative(g, v);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(d[i] - 3.0 * std::cos(3.0 * g[i])));
    return e;
  };
  const double e1 = err(32), e2 = err(64);
  CHECK(e2 < 1e-5);
  CHECK(e1 / e2 > 4.0);
}

TEST_CASE("sqrt-mapped derivative is exact for low powers of sqrt(distance)") {
  // Left half: v = 1 + 2d + 3 d^{3/2} - d^2 with d = x; right half mirrors it.
  const auto g = Grid::clustered(40);
  auto v_of = [](double d) { return 1.0 + 2.0 * d + 3.0 * std::pow(d, 1.5) - d * d; };
  auto dv_of = [](double d) { return 2.0 + 4.5 * std::sqrt(d) - 2.0 * d; };
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = v_of(std::min(g[i], 1.0 - g[i]));
  const auto dv = discrete::nodal_derivative_sqrt_ends(g, v);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = std::min(g[i], 1.0 - g[i]);
    if (std::abs(g[i] - 0.5) < 0.2) continue;
    CAPTURE(i);
    CHECK(dv[i] == doctest::Approx(g[i] < 0.5 ? dv_of(d) : -dv_of(d)).epsilon(1e-9));
  }
  CHECK(dv.front() == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(dv.back() == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("sqrt-mapped derivative converges on smooth fields") {
  auto err = [](std::size_t n) {
    const auto g = Grid::clustered(n);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::sin(2.0 * g[i]);
    const auto dv = discrete::nodal_derivative_sqrt_ends(g, v);
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(dv[i] - 2.0 * std::cos(2.0 * g[i])));
    return m;
  };
  CHECK(err(128) < 1e-6);
  CHECK(err(32) / err(64) > 12.0);
  CHECK(err(64) / err(128) > 12.0);
}

TEST_CASE("tridiagonal solve matches a hand-checked system") {
  const std::vector<double> lower = {0.0, -1.0, -1.0}, diag = {2.0, 2.0, 2.0}, upper = {-1.0, -1.0, 0.0};
  const std::vector<double> rhs = {1.0, 0.0, 1.0};
  const auto x = discrete::solve_tridiagonal(lower, diag, upper, rhs);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
  CHECK(x[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(discrete::solve_tridiagonal(lower, diag, upper, std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("cumulative trapezoid integrates linear data exactly") {
  const auto g = Grid::clustered(17);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = 2.0 * g[i] + 1.0;
  const auto c = discrete::cumulative_trapezoid(g, v);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(c[i] == doctest::Approx(g[i] * g[i] + g[i]).epsilon(1e-14));
}

TEST_CASE("dual volumes sum to the domain length") {
  const auto g = Grid::clustered(33);
  double s = 0.0;
  for (double v : discrete::dual_volumes(g)) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
}
