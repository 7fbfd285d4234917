#include "ksmode/profile.hpp"

#include <cmath>
#include <string>

#include "ksmode/quadrature.hpp"

namespace ksmode::profile {

double q(double r) {
  const double d = 2.0 + r * r;
  return 4.0 * (6.0 + r * r) / (d * d);
}

double q_deriv(double r, int order) {
  const double r2 = r * r;
  const double d = 2.0 + r2;
  switch (order) {
    case 1:
      return -8.0 * r * (r2 + 10.0) / (d * d * d);
    case 2:
      return 8.0 * (3.0 * r2 * r2 + 44.0 * r2 - 20.0) / (d * d * d * d);
    case 3:
      return -96.0 * r * (r2 * r2 + 20.0 * r2 - 28.0) / (d * d * d * d * d);
    default:
      throw PreconditionError("q_deriv: unsupported order " + std::to_string(order));
  }
}

double lambda_q(double r) {
  const double d = 2.0 + r * r;
  return 16.0 * (6.0 - r * r) / (d * d * d);
}

double d2inv_q(double r) {
  if (r == 0.0) return 0.0;
  const double v = quad::integrate([](double s) { return q(s) * s * s; }, 0.0, r);
  return v / (r * r);
}

double d2inv_q_closed(double r) { return 4.0 * r / (2.0 + r * r); }

double big_g_closed(double r) {
  const double d = 2.0 + r * r;
  return -8.0 * std::pow(r, 5) / (d * d);
}

double big_g_quadrature(double r) {
  return quad::integrate([](double s) { return q_deriv(s, 1) * s * s * s; }, 0.0, r);
}

AuxPotentials aux_potentials(double r) {
  const double d = r * r + 2.0;
  AuxPotentials a{};
  a.v1 = 8.0 * r / (d * d);
  a.v2 = 8.0 * (r * r + 10.0) / (d * d * d);
  a.d2invQ = d2inv_q_closed(r);
  a.bigG = q(r) * r * r * r - 3.0 * r * r * a.d2invQ;
  return a;
}

double g_over_G(double r, int order) {
  const double r2 = r * r;
  const double N = r2 + 10.0, N1 = 2.0 * r, N2 = 2.0;
  const double D = r2 * r2 * (r2 + 2.0);
  const double D1 = 6.0 * r2 * r2 * r + 8.0 * r2 * r;
  const double D2 = 30.0 * r2 * r2 + 24.0 * r2;
  switch (order) {
    case 0:
      return N / D;
    case 1:
      return (N1 * D - N * D1) / (D * D);
    case 2:
      return (N2 * D - N * D2) / (D * D) - 2.0 * D1 * (N1 * D - N * D1) / (D * D * D);
    default:
      throw PreconditionError("g_over_G: unsupported order " + std::to_string(order));
  }
}

double coeff_a(double r) { return -2.0 / r + 0.5 * r - d2inv_q_closed(r); }

double coeff_b(double r) {
  return 2.0 / (r * r) + 1.0 - 2.0 * q(r) - 2.0 * r * r * r * g_over_G(r, 1) -
         6.0 * r * r * g_over_G(r, 0);
}

double third_bound_term(double r) {
  const double r2 = r * r;
  const double d = 2.0 + r2;
  return 8.0 * (5.0 * r2 * r2 + 68.0 * r2 + 20.0) / (d * d * d * d);
}

double profile_residual(const RadialGrid& grid, double scale) {
  double worst = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double Q = scale * q(r);
    const double Q1 = scale * q_deriv(r, 1);
    const double Q2 = scale * q_deriv(r, 2);
    const double lap = Q2 + 2.0 * Q1 / r;
    const double lam = r * Q1 + 2.0 * Q;
    const double d2 = scale * d2inv_q_closed(r);
    worst = std::max(worst, std::abs(-lap + 0.5 * lam - Q * Q - Q1 * d2));
  }
  return worst;
}

RadialFunction sample_q(const GridPtr& grid) { return RadialFunction::sample(grid, q); }
RadialFunction sample_dq(const GridPtr& grid) {
  return RadialFunction::sample(grid, [](double r) { return q_deriv(r, 1); });
}
RadialFunction sample_lambda_q(const GridPtr& grid) { return RadialFunction::sample(grid, lambda_q); }

}  // namespace ksmode::profile
