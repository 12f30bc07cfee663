#pragma once

// The potential w = F(rho) = ln(rho) + 1/(2 rho^2) on the subsonic branch
// rho >= 1, its derivative, and the inverse rho = f(w).
//
// F'(1) = 0, so the inverse has a square-root branch at the sonic value
// w = 1/2: f(1/2 + e^2) = 1 + e + O(e^2). Everything near that point is
// computed from the excess u = w - 1/2 to avoid cancellation.

namespace sonic {

struct TransformTolerance {
  double newton_tol = 1e-13;
  int max_newton_iter = 60;
  double sonic_switch = 1e-12;  // below this excess, f uses the square-root branch directly
};

double F(double rho);
double F_prime(double rho);

/// F(rho) - 1/2, evaluated without cancellation near rho = 1.
double F_excess(double rho);

double f(double w, const TransformTolerance& tol = {});
double f_prime(double w, const TransformTolerance& tol = {});

/// Inverse in terms of the excess: returns rho >= 1 with F_excess(rho) = u.
double f_from_excess(double u, const TransformTolerance& tol = {});
/// 1/F'(rho) at rho = f_from_excess(u); u must be positive.
double f_prime_from_excess(double u, const TransformTolerance& tol = {});

/// Constants k1 <= k2 with k1 (rho-1)^2 <= F(rho) - 1/2 <= k2 (rho-1)^2 on [1, b_sup].
struct QuadraticPinch {
  double k1;
  double k2;
};
QuadraticPinch quadratic_pinch(double b_sup);

/// C with f'(w) <= C / sqrt(w - 1/2) for w in (1/2, F(b_sup)]:
/// C = sqrt(k2) * b_sup^3 / (b_sup + 1), from F'(s) >= (b_sup+1)/b_sup^3 (s-1).
double f_prime_bound_constant(double b_sup);

}  // namespace sonic
