#pragma once

#include "ksmode/radial.hpp"

namespace ksmode::profile {

// Q(r) = 4(6 + r^2) / (2 + r^2)^2
double q(double r);
// Closed-form derivatives, order 1..3.
double q_deriv(double r, int order);
// ΛQ = r Q' + 2Q = 16(6 - r^2)/(2 + r^2)^3
double lambda_q(double r);
// D_2^{-1}Q by adaptive quadrature of the defining integral (oracle path).
double d2inv_q(double r);
// Closed form 4r/(2 + r^2).
double d2inv_q_closed(double r);

struct AuxPotentials {
  double v1;
  double v2;
  double bigG;
  double d2invQ;
};
// Closed forms: V1, V2, G = Q r^3 - 3 r^2 D_2^{-1}Q, D_2^{-1}Q.
AuxPotentials aux_potentials(double r);
// G = ∫_0^r ∂_sQ s^3 ds by quadrature (oracle path).
double big_g_quadrature(double r);
// -8 r^5 / (2 + r^2)^2
double big_g_closed(double r);

// φ = g/G = (r^2 + 10)/(r^4 (r^2 + 2)) and its derivatives, order 0..2.
double g_over_G(double r, int order = 0);

// Coefficients of the localized l = 1 operator -∂^2 + A ∂ + B.
double coeff_a(double r);
double coeff_b(double r);

// (∂_r - 2/r) Q' = 8(5r^4 + 68r^2 + 20)/(2 + r^2)^4
double third_bound_term(double r);

// Max |−ΔQ + ½ΛQ − Q² − Q'D_2^{-1}Q| over the nodes. `scale` multiplies Q
// (1 reproduces the profile).
double profile_residual(const RadialGrid& grid, double scale = 1.0);

struct IdentityResiduals {
  double i;    // discrete (ℒ_1 + ½) ∂_rQ, max over the residual window
  double ii;   // -Q' + (r/2)Q - ½D_2^{-1}Q - Q D_2^{-1}Q
  double iii;  // (-∂^2 + A∂ + B + 1 + (2/r)D_2^{-1}Q) φ
};
// (ii) and (iii) are evaluated on [0.01, 50] and [0.1, 20] respectively,
// restricted to the grid's nodes; (i) on r in [0.5, rmax/2].
IdentityResiduals identity_residuals(const GridPtr& grid);

RadialFunction sample_q(const GridPtr& grid);
RadialFunction sample_dq(const GridPtr& grid);
RadialFunction sample_lambda_q(const GridPtr& grid);

}  // namespace ksmode::profile
