#include "ksmode/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "ksmode/error.hpp"

namespace ksmode::quad {

double integrate(const Fn& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err);
  if (!std::isfinite(v)) throw NumericalError("quadrature produced a non-finite value");
  return v;
}

double integrate_from_zero(const Fn& f, double b, double rel_tol) {
  if (!(b > 0.0)) return 0.0;
  double total = 0.0;
  double hi = b;
  // panels [b 10^{-k-1}, b 10^{-k}] down to 1e-14 b
  for (int k = 0; k < 14; ++k) {
    const double lo = hi / 10.0;
    total += integrate(f, lo, hi, rel_tol);
    hi = lo;
  }
  return total;
}

double integrate_to_infinity(const Fn& f, double a, double rel_tol, double cutoff) {
  if (!(cutoff > a)) cutoff = 10.0 * std::max(a, 1.0);
  double total = 0.0;
  double lo = a;
  while (lo < cutoff) {
    const double hi = std::min(cutoff, lo <= 0.0 ? 1e-3 : std::max(2.0 * lo, lo + 1e-3));
    total += integrate(f, lo, hi, rel_tol);
    lo = hi;
  }
  const double f1 = f(cutoff), f2 = f(2.0 * cutoff);
  if (f1 == 0.0 && f2 == 0.0) return total;
  if (f1 == 0.0 || f2 == 0.0 || (f1 > 0) != (f2 > 0))
    throw NumericalError("integrate_to_infinity: tail is not of one sign");
  const double p = -std::log(f2 / f1) / std::log(2.0);
  if (!(p > 1.0))
    throw NumericalError("integrate_to_infinity: tail decays too slowly (p = " + std::to_string(p) + ")");
  return total + f1 * cutoff / (p - 1.0);
}

double nested_from_origin(const Fn& inner, const std::function<double(double, double)>& outer,
                          double lo, double hi, int panels_per_decade) {
  if (!(lo > 0.0 && hi > lo)) throw PreconditionError("nested_from_origin: need 0 < lo < hi");
  using G = boost::math::quadrature::gauss<double, 10>;
  double xg[10], wg[10];
  for (int i = 0; i < 5; ++i) {
    xg[i] = 0.5 - 0.5 * G::abscissa()[i];
    xg[9 - i] = 0.5 + 0.5 * G::abscissa()[i];
    wg[i] = wg[9 - i] = 0.5 * G::weights()[i];
  }
  // ∫ f over [e^ta, e^tb] in the variable t = log s
  auto sub = [&](const Fn& f, double ta, double tb) {
    double acc = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double s = std::exp(ta + (tb - ta) * xg[k]);
      acc += wg[k] * f(s) * s;
    }
    return acc * (tb - ta);
  };
  auto slope = [](double fa, double fb, double a, double b) { return std::log(std::abs(fb / fa)) / std::log(b / a); };

  const double t0 = std::log(lo), t1 = std::log(hi);
  const int panels = std::max(1, static_cast<int>(std::ceil((t1 - t0) / std::log(10.0) * panels_per_decade)));
  const double dt = (t1 - t0) / panels;

  const double fi0 = inner(lo);
  double cum = fi0 == 0.0 ? 0.0 : fi0 * lo / (slope(fi0, inner(2.0 * lo), lo, 2.0 * lo) + 1.0);
  const double g_lo = outer(lo, cum);
  double total = 0.0;
  if (g_lo != 0.0) {
    const double p = slope(g_lo, outer(2.0 * lo, cum + quad::integrate(inner, lo, 2.0 * lo, 1e-10)), lo, 2.0 * lo);
    if (!(p > -1.0)) throw NumericalError("nested_from_origin: outer integrand not integrable at the origin");
    total += g_lo * lo / (p + 1.0);
  }
  double g_prev = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double ta = t0 + p * dt;
    for (int k = 0; k < 10; ++k) {
      const double tk = ta + dt * xg[k];
      const double s = std::exp(tk);
      total += dt * wg[k] * outer(s, cum + sub(inner, ta, tk)) * s;
    }
    if (p == panels - 1) g_prev = outer(std::exp(ta), cum);
    cum += sub(inner, ta, ta + dt);
  }
  const double g_hi = outer(hi, cum);
  if (g_hi != 0.0) {
    const double q = slope(g_prev, g_hi, std::exp(t1 - dt), hi);
    if (!(q < -1.0)) throw NumericalError("nested_from_origin: outer integrand not integrable at infinity");
    total += g_hi * hi / (-q - 1.0);
  }
  if (!std::isfinite(total)) throw NumericalError("nested_from_origin: non-finite result");
  return total;
}

}  // namespace ksmode::quad
