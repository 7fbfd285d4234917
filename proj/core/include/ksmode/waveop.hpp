#pragma once

#include <functional>
#include <utility>

#include "ksmode/operators.hpp"
#include "ksmode/radial.hpp"

namespace ksmode::waveop {

// Sampled coefficient functions of the l = 1 wave operator. U_1 grows like
// e^{r^2/8} and overflows on wide grids, so its logarithm is stored.
struct WaveOpContext {
  GridPtr grid;
  RadialFunction gOverG;  // (r^2+10)/(r^4(r^2+2))
  RadialFunction A;       // -2/r + r/2 - D_2^{-1}Q
  RadialFunction B;
  RadialFunction log_u1;  // r^2/8 - log(r(2+r^2))

  static WaveOpContext make(const GridPtr& grid);
};

// T f = f - (g/G) ∫_0^r f s^3 ds
RadialFunction apply_T(const WaveOpContext& ctx, const RadialFunction& f);
// T_ω f = f - ((f, Q')_ω / (Q', Q')_ω) Q' with ω = -r^3/Q', both inner
// products on [0, r] by quadrature against the sampled Q'.
RadialFunction apply_T_omega(const WaveOpContext& ctx, const RadialFunction& f);

struct CoefficientIdentities {
  double a_defect;  // max |r^3 (g/G) + A - A_0|
  double b_defect;  // max |2 (g/G)' r^3 + 3 r^2 (g/G) - A (g/G) r^3 + B - B_0|
};
CoefficientIdentities coefficient_identities(const WaveOpContext& ctx);

// Residual windows start here: the coefficients carry 2/r^2 and r^{-4}
// factors, so the nodal error constant blows up on the first few nodes.
inline constexpr double kWindowStart = 0.5;

// max |∂_r log U_1 - A/2| over nodes r >= kWindowStart, ∂_r by finite differences
double log_u1_defect(const WaveOpContext& ctx);

// max |T ℒ_1 f - tilde-ℒ_1 T f| over nodes in [kWindowStart, rmax/2], using the
// assembled matrices of ℒ_1 and tilde-ℒ_1.
double commutator_residual(const WaveOpContext& ctx, const RadialFunction& f);

// max |U_1^{-1} tilde-ℒ_1 (U_1 g) - tilde-ℒ_1' g| over interior nodes.
// Throws PreconditionError when g is not negligible beyond r = max_radius.
double conjugation_residual(const WaveOpContext& ctx, const RadialFunction& g,
                            double max_radius = 60.0);

struct PotentialMin {
  double radius;
  double value;
};
// Minimum of 12/r^2 + r^2/16 - 8/(2+r^2) - 3/4 on (0.1, 50).
PotentialMin potential_min_tilde_L1_prime();

struct NonvanishingResult {
  bool pass = false;
  int sign = 0;
  double value_at_one = 0.0;       // D_3^{-1}(sampler) at r = 1
  std::pair<double, double> bracket{0.0, 0.0};  // sign-change bracket on failure
};
// Checks D_3^{-1} f = r^{-3} ∫_0^r f s^3 ds keeps one sign on (0, rmax] with
// margin c r^2/(1+r^2)^2.
NonvanishingResult nonvanishing_check(const std::function<double(double)>& sampler,
                                      double rmax = 40.0, int n = 4000);

}  // namespace ksmode::waveop
