#include "sonic/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "sonic/core_types.hpp"

namespace sonic {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_subsonic(double rho, const char* who) {
  if (!(rho >= 1.0))
    throw DomainError(std::string(who) + ": rho = " + num(rho) +
                      " < 1 lies on the unsupported supersonic branch");
}

}  // namespace

double F(double rho) {
  require_subsonic(rho, "F");
  return std::log(rho) + 0.5 / (rho * rho);
}

double F_excess(double rho) {
  require_subsonic(rho, "F_excess");
  const double e = rho - 1.0;
  if (e < 0.01) {
    // sum_{k>=2} (-1)^k (k-1)(k+2)/(2k) e^k
    double sum = 0.0;
    double power = e * e;
    for (int k = 2; k <= 14; ++k) {
      double c = (k - 1.0) * (k + 2.0) / (2.0 * k);
      sum += (k % 2 == 0 ? c : -c) * power;
      power *= e;
    }
    return sum;
  }
  return std::log1p(e) - e * (2.0 + e) / (2.0 * rho * rho);
}

double F_prime(double rho) {
  require_subsonic(rho, "F_prime");
  return (rho + 1.0) * (rho - 1.0) / (rho * rho * rho);
}

double f_from_excess(double u, const TransformTolerance& tol) {
  if (!(u >= 0.0)) throw DomainError("f: w = 1/2 + " + num(u) + " lies below the sonic value 1/2");
  if (u == 0.0) return 1.0;
  if (u < tol.sonic_switch) return 1.0 + std::sqrt(u);

  // Safeguarded Newton on g(rho) = F_excess(rho) - u inside [1, exp(u + 1/2)].
  double lo = 1.0;
  double hi = std::exp(u + 0.5);
  double rho = std::min(1.0 + std::sqrt(u), hi);
  double g = F_excess(rho) - u;
  for (int it = 0; it < tol.max_newton_iter; ++it) {
    if (g == 0.0) return rho;
    if (g > 0.0)
      hi = std::min(hi, rho);
    else
      lo = std::max(lo, rho);

    double fp = F_prime(rho);
    double next = fp > 0.0 ? rho - g / fp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    double step = next - rho;
    rho = next;
    g = F_excess(rho) - u;
    if (std::abs(step) <= 2.0 * std::numeric_limits<double>::epsilon() * rho ||
        hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * rho) {
      break;
    }
  }
  if (!(std::abs(g) <= tol.newton_tol))
    throw NumericError("f: inverse Newton failed for w - 1/2 = " + num(u) + " (|F(rho) - w| = " +
                       num(std::abs(g)) + " at rho = " + num(rho) + ")");
  return rho;
}

double f(double w, const TransformTolerance& tol) {
  if (!(w >= 0.5)) throw DomainError("f: w = " + num(w) + " lies below the sonic value 1/2");
  return f_from_excess(w - 0.5, tol);
}

double f_prime_from_excess(double u, const TransformTolerance& tol) {
  if (!(u > 0.0))
    throw DomainError("f_prime: derivative is unbounded at the sonic value w = 1/2");
  if (u < tol.sonic_switch) return 0.5 / std::sqrt(u);
  return 1.0 / F_prime(f_from_excess(u, tol));
}

double f_prime(double w, const TransformTolerance& tol) {
  if (!(w > 0.5))
    throw DomainError("f_prime: w = " + num(w) + " must exceed the sonic value 1/2");
  return f_prime_from_excess(w - 0.5, tol);
}

QuadraticPinch quadratic_pinch(double b_sup) {
  if (!(b_sup >= 1.0)) throw DomainError("quadratic_pinch: b_sup must be >= 1");
  // (F - 1/2)/(rho-1)^2 -> 1 as rho -> 1.
  double k1 = 1.0, k2 = 1.0;
  constexpr int samples = 4096;
  for (int i = 1; i <= samples; ++i) {
    double rho = 1.0 + (b_sup - 1.0) * static_cast<double>(i) / samples;
    double e = rho - 1.0;
    if (e <= 0.0) continue;
    double q = F_excess(rho) / (e * e);
    k1 = std::min(k1, q);
    k2 = std::max(k2, q);
  }
  return {k1, k2};
}

double f_prime_bound_constant(double b_sup) {
  const auto pinch = quadratic_pinch(b_sup);
  return std::sqrt(pinch.k2) * b_sup * b_sup * b_sup / (b_sup + 1.0);
}

}  // namespace sonic
