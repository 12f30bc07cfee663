#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "sonic/transform.hpp"
#include "sonic/core_types.hpp"

using namespace sonic;

TEST_CASE("F at reference points") {
  CHECK(F(1.0) == 0.5);
  CHECK(F(2.0) == doctest::Approx(0.8181471805599453).epsilon(1e-15));
}

TEST_CASE("F is quadratic at the sonic point") {
  const double e = 1e-4;
  CHECK(F_excess(1.0 + e) == doctest::Approx(e * e).epsilon(1e-3));
  CHECK(F(1.0 + e) - 0.5 == doctest::Approx(1e-8).epsilon(1e-3));
}

TEST_CASE("F_prime at reference points") {
  CHECK(F_prime(1.0) == 0.0);
  CHECK(F_prime(2.0) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("F_prime lower bound on [1, b_sup]") {
  const double b_sup = 3.0;
  const double c = (b_sup + 1.0) / (b_sup * b_sup * b_sup);
  for (int i = 0; i <= 2000; ++i) {
    const double s = 1.0 + (b_sup - 1.0) * i / 2000.0;
    CHECK(F_prime(s) >= c * (s - 1.0) - 1e-15);
  }
}

TEST_CASE("F and F_prime reject the supersonic branch") {
  CHECK_THROWS_AS(F(0.9), DomainError);
  CHECK_THROWS_AS(F_prime(0.99), DomainError);
}

TEST_CASE("inverse at reference points") {
  CHECK(f(0.5) == 1.0);
  CHECK(f(0.8181471805599453) == doctest::Approx(2.0).epsilon(1e-14));
  const double e = 1e-3;
  CHECK(f(0.5 + e * e) - 1.0 == doctest::Approx(e).epsilon(2e-3));
}

TEST_CASE("inverse rejects values below the sonic value") {
  CHECK_THROWS_AS(f(0.49), DomainError);
  CHECK_THROWS_AS(f_prime(0.5), DomainError);
  CHECK_THROWS_AS(f_prime(0.4), DomainError);
}

TEST_CASE("f_prime at reference points") {
  CHECK(f_prime(F(2.0)) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
  const double w = 0.7, h = 1e-6;
  CHECK((f(w + h) - f(w - h)) / (2 * h) == doctest::Approx(f_prime(w)).epsilon(1e-6));
}

TEST_CASE("f_prime follows the square-root branch") {
  for (double e : {1e-3, 1e-4, 1e-5}) {
    CHECK(f_prime(0.5 + e * e) * 2.0 * e == doctest::Approx(1.0).epsilon(5.0 * e));
  }
}

TEST_CASE("f_prime obeys the C / sqrt(w - 1/2) bound") {
  const double b_sup = 2.5;
  const double c = f_prime_bound_constant(b_sup);
  for (int i = 1; i <= 2000; ++i) {
    const double w = 0.5 + (F(b_sup) - 0.5) * i / 2000.0;
    CHECK(f_prime(w) <= c / std::sqrt(w - 0.5) * (1.0 + 1e-12));
  }
}

TEST_CASE("round trip in both directions") {
  const TransformTolerance tol;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> rho_dist(1.0, 10.0);
  std::uniform_real_distribution<double> w_dist(0.5, F(10.0));
  for (int i = 0; i < 5000; ++i) {
    const double rho = rho_dist(gen);
    CHECK(std::abs(f(F(rho)) - rho) <= 10.0 * tol.newton_tol);
    const double w = w_dist(gen);
    CHECK(std::abs(F(f(w)) - w) <= tol.newton_tol);
  }
}

TEST_CASE("excess form round trip near the sonic point") {
  for (double e : {1e-3, 0.5, 5.0}) {
    const double rho = 1.0 + e;
    CHECK(f_from_excess(F_excess(rho)) == doctest::Approx(rho).epsilon(1e-15));
    CHECK(f_from_excess(F_excess(rho)) - 1.0 == doctest::Approx(e).epsilon(1e-12));
  }
  // Square-root branch: rho - 1 = sqrt(u) + 5/6 u + O(u^{3/2}).
  for (double e : {1e-12, 1e-9, 1e-6}) {
    const double u = F_excess(1.0 + e);
    REQUIRE(u < TransformTolerance{}.sonic_switch);
    const double got = f_from_excess(u) - 1.0;
    CHECK(std::abs(got - e) <= 0.84 * u + std::numeric_limits<double>::epsilon());
    CHECK(std::abs(got - e) <= 1e-12);
  }
  CHECK(f_from_excess(0.0) == 1.0);
}

TEST_CASE("F and f are strictly increasing") {
  double prev_F = -1.0, prev_f = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double rho = 1.0 + 9.0 * i / 4000.0;
    const double w = 0.5 + (F(10.0) - 0.5) * i / 4000.0;
    const double vF = F(rho), vf = f(w);
    if (i > 0) {
      CHECK(vF > prev_F);
      CHECK(vf > prev_f);
    }
    prev_F = vF;
    prev_f = vf;
  }
}

TEST_CASE("quadratic pinch brackets F - 1/2") {
  const double b_sup = 3.0;
  const auto k = quadratic_pinch(b_sup);
  CHECK(k.k1 > 0.0);
  CHECK(k.k1 <= k.k2);
  CHECK(k.k2 == doctest::Approx(1.0).epsilon(1e-6));
  for (int i = 1; i <= 2000; ++i) {
    const double rho = 1.0 + (b_sup - 1.0) * i / 2000.0;
    const double d2 = (rho - 1.0) * (rho - 1.0);
    CHECK(F_excess(rho) >= k.k1 * d2 * (1.0 - 1e-12));
    CHECK(F_excess(rho) <= k.k2 * d2 * (1.0 + 1e-12));
  }
}
