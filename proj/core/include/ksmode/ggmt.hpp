#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ksmode/radial.hpp"
#include "ksmode/weight.hpp"

namespace ksmode::ggmt {

struct AlphaBeta {
  double alphaR;
  double betaR;
};
// Closed forms of ∫_0^R r^3/(2+r^2)^2 and ∫_R^∞ r/(2+r^2)^2.
AlphaBeta alpha_beta(double R);
AlphaBeta alpha_beta_quadrature(double R);

// W_1 = (8(l-α)+4)/(r^2+2)^2 + 32/(r^2+2)^3, requires l-α > -1/2.
double w1_potential(double l_minus_alpha, double r);

struct MuValue {
  double value;      // outer ∫ W^{-1} s^{-2l-2α} (inner ∫_0^s) ds
  double exchanged;  // order-exchanged form
  double rel_diff;
};
// ¼ ∫_0^∞ W^{-1} s^{-2l-2α} ∫_0^s W_1^{-1} V_2^2 r^{2l+2α} dr ds. Throws
// NumericalError if the two integration orders disagree beyond 1e-4.
MuValue mu_functional(int l, double alpha, const WeightW& w);

double prefactor(double p, double l);

struct CountResult {
  double bigN;
  double prefactor;
  double integral;                                 // ∫ r^{2p-1} |V_-|^p
  std::vector<std::pair<double, double>> support;  // intervals where V < 0
};
struct CountOptions {
  double r_lo = 1e-4;
  double r_hi = 1e4;
  int scan_points = 512;
};
// N_{p,l}(V) = prefactor(p,l) ∫_0^∞ r^{2p-1} |V_-|^p dr.
CountResult ggmt_count(double p, double l, const std::function<double(double)>& v,
                       const CountOptions& opt = {});

struct PipelineParams {
  int l = 2;
  double alpha = 0.2;
  double p = 4.0;
  double theta = 0.5;
  WeightW w{};
  double R = 4.0;
};

struct GgmtReport {
  PipelineParams params;
  double alphaR = 0.0;
  double betaR = 0.0;
  double big_l = 0.0;
  double l_eff = 0.0;
  double mu = 0.0;
  double mu_exchanged = 0.0;
  double prefactor = 0.0;
  double bigN = 0.0;
  double u_infinity = 0.0;
  std::vector<std::pair<double, double>> support;
};

// U = θL/r^2 + (1-2α)/4 + ½D_{2α-4}D_2^{-1}Q - Q - lμW
double u_potential(const PipelineParams& prm, double mu, double r);
GgmtReport l2_pipeline(const PipelineParams& prm = {});

struct FormValue {
  double value;    // 4π Re(ℒ_l f, f)
  double norm_sq;  // 4π ‖f‖^2 in L^2(r^2 dr)
};
// Six-term quadratic form with w = Δ_l^{-1} f.
FormValue coercivity_form(const RadialFunction& f, int l);

struct InterpolationResult {
  double lhs;
  double rhs;
  bool pass;
};
InterpolationResult interpolation_check(const RadialFunction& f, int l, double R);

struct Rational {
  std::string text;  // "p/q" in lowest terms
  double value;
};
struct L3Constants {
  Rational frac1;        // 1 - 13/24 - 544/1323
  Rational frac1_times12;
  Rational frac2;        // 1/4 - 272/2205
  Rational frac2_excess;  // frac2 - 1/8
  bool frac1_matches;     // == 499/10584
  bool frac2_matches;     // == 1/8 + 29/17640
};
L3Constants l3_rational_constants();

struct QBounds {
  bool pass;
  double sup_qr2;        // max over nodes and r = √6
  double sup_q2;         // max of Q''(2+r^2)^2 over nodes and r = 2
  double min_third;      // min of (∂_r - 2/r)Q'
};
QBounds pointwise_q_bounds(const RadialGrid& grid);

}  // namespace ksmode::ggmt
