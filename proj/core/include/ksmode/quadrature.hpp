#pragma once

#include <functional>

namespace ksmode::quad {

using Fn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a, b].
double integrate(const Fn& f, double a, double b, double rel_tol = 1e-11);

// ∫_a^∞ f on log-spaced panels up to `cutoff`, plus an analytic tail from
// a power-law fit f ~ c s^{-p} at the cutoff. Throws NumericalError if the
// fitted p <= 1.
double integrate_to_infinity(const Fn& f, double a, double rel_tol = 1e-11,
                             double cutoff = 1e4);

// ∫_0^b with log-spaced panels toward the origin (integrable endpoint
// singularities).
double integrate_from_zero(const Fn& f, double b, double rel_tol = 1e-11);

// ∫_0^∞ outer(r, I(r)) dr with I(r) = ∫_0^r inner, on log-spaced 10-point
// Gauss-Legendre panels over [lo, hi] carrying I as a running sum. Both ends
// are closed with power laws fitted at the endpoints; throws NumericalError
// when the fitted outer exponent is not integrable.
double nested_from_origin(const Fn& inner, const std::function<double(double, double)>& outer,
                          double lo = 1e-8, double hi = 1e8, int panels_per_decade = 32);

}  // namespace ksmode::quad
