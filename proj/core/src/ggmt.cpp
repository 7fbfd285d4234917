#include "ksmode/ggmt.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ksmode/operators.hpp"
#include "ksmode/profile.hpp"
#include "ksmode/quadrature.hpp"

namespace ksmode::ggmt {

namespace {

// 10-point Gauss-Legendre on [0, 1]
void gl_rule(std::array<double, 10>& x, std::array<double, 10>& w) {
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  for (int i = 0; i < 5; ++i) {
    x[i] = 0.5 - 0.5 * ab[i];
    x[9 - i] = 0.5 + 0.5 * ab[i];
    w[i] = w[9 - i] = 0.5 * wt[i];
  }
}

}  // namespace

AlphaBeta alpha_beta(double R) {
  if (!(R > 0.0)) throw PreconditionError("alpha_beta: R must be positive");
  const double d = R * R + 2.0;
  return {1.0 / d + 0.5 * std::log(d) - 0.5 - 0.5 * std::log(2.0), 1.0 / (2.0 * d)};
}

AlphaBeta alpha_beta_quadrature(double R) {
  if (!(R > 0.0)) throw PreconditionError("alpha_beta: R must be positive");
  auto fa = [](double r) { const double d = 2.0 + r * r; return r * r * r / (d * d); };
  auto fb = [](double r) { const double d = 2.0 + r * r; return r / (d * d); };
  return {quad::integrate(fa, 0.0, R, 1e-13), quad::integrate_to_infinity(fb, R, 1e-13, 1e5)};
}

double w1_potential(double lma, double r) {
  if (!(lma > -0.5)) throw PreconditionError("w1_potential: l - alpha must exceed -1/2");
  const double d = r * r + 2.0;
  return (8.0 * lma + 4.0) / (d * d) + 32.0 / (d * d * d);
}

MuValue mu_functional(int l, double alpha, const WeightW& w) {
  w.validate(l, alpha);
  const double e = 2.0 * l + 2.0 * alpha;
  const double lma = l - alpha;
  auto kernel = [e, lma](double r) {
    const double v2 = profile::aux_potentials(r).v2;
    return v2 * v2 * std::pow(r, e) / w1_potential(lma, r);
  };
  auto winv = [&w, e](double s) { return std::pow(s, -e) / w(s); };

  // Log-spaced panels with Gauss-Legendre nodes; the inner integral is carried
  // as a running sum plus a sub-panel rule up to each outer node.
  const int panels = 1024;
  const double t0 = std::log(1e-8), t1 = std::log(1e8), dt = (t1 - t0) / panels;
  std::array<double, 10> xg{}, wg{};
  gl_rule(xg, wg);
  auto sub = [&](const auto& f, double ta, double tb) {
    double acc = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double s = std::exp(ta + (tb - ta) * xg[k]);
      acc += wg[k] * f(s) * s;
    }
    return acc * (tb - ta);
  };
  auto end_slope = [](const auto& f, double a, double b) {
    return std::log(std::abs(f(b) / f(a))) / std::log(b / a);
  };
  const double s_lo = std::exp(t0), s_hi = std::exp(t1);

  // inner from the origin: kernel ~ r^q near 0
  const double q0 = end_slope(kernel, s_lo, 2.0 * s_lo);
  double cum = kernel(s_lo) * s_lo / (q0 + 1.0);
  double a = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double ta = t0 + p * dt;
    for (int k = 0; k < 10; ++k) {
      const double tk = ta + dt * xg[k];
      const double s = std::exp(tk);
      a += dt * wg[k] * winv(s) * s * (cum + sub(kernel, ta, tk));
    }
    cum += sub(kernel, ta, ta + dt);
  }
  const double qw = end_slope(winv, 0.5 * s_hi, s_hi);
  a += winv(s_hi) * cum * s_hi / (-qw - 1.0);

  // exchanged order: tail integral of 1/(s^e W) from the right
  double tail = winv(s_hi) * s_hi / (-qw - 1.0);
  double b = 0.0;
  for (int p = panels - 1; p >= 0; --p) {
    const double ta = t0 + p * dt, tb = ta + dt;
    for (int k = 0; k < 10; ++k) {
      const double tk = ta + dt * xg[k];
      const double s = std::exp(tk);
      b += dt * wg[k] * kernel(s) * s * (tail + sub(winv, tk, tb));
    }
    tail += sub(winv, ta, tb);
  }
  b += kernel(s_lo) * s_lo / (q0 + 1.0) * tail;

  MuValue mv{0.25 * a, 0.25 * b, std::abs(a - b) / std::abs(a)};
  if (!std::isfinite(mv.value) || !(mv.rel_diff <= 1e-4)) {
    std::ostringstream os;
    os << "mu_functional: integration orders disagree (" << mv.value << " vs " << mv.exchanged << ")";
    throw NumericalError(os.str());
  }
  return mv;
}

double prefactor(double p, double l) {
  if (!(p > 1.0)) throw PreconditionError("prefactor: p must exceed 1");
  const double lg = (p - 1.0) * std::log(p - 1.0) + std::lgamma(2.0 * p) - p * std::log(p) -
                    2.0 * std::lgamma(p) - (2.0 * p - 1.0) * std::log(2.0 * l + 1.0);
  return std::exp(lg);
}

CountResult ggmt_count(double p, double l, const std::function<double(double)>& v,
                       const CountOptions& opt) {
  if (!(l >= 0.0)) throw PreconditionError("ggmt_count: l must be >= 0");
  CountResult out{0.0, prefactor(p, l), 0.0, {}};
  const int m = opt.scan_points;
  std::vector<double> xs(m), vs(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = opt.r_lo * std::pow(opt.r_hi / opt.r_lo, static_cast<double>(i) / (m - 1));
    vs[i] = v(xs[i]);
    if (!std::isfinite(vs[i])) throw NumericalError("ggmt_count: potential is not finite on the scan");
  }
  auto root = [&v](double a, double b) {
    double fa = v(a);
    for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
      const double c = 0.5 * (a + b);
      const double fc = v(c);
      if ((fc < 0) == (fa < 0)) { a = c; fa = fc; } else { b = c; }
    }
    return 0.5 * (a + b);
  };
  auto integrand = [&v, p](double r) {
    const double x = v(r);
    return x < 0 ? std::pow(r, 2 * p - 1) * std::pow(-x, p) : 0.0;
  };
  // local power |V| ~ r^{-q} from two samples
  auto local_q = [&v](double r1, double r2) {
    return -std::log(std::abs(v(r2) / v(r1))) / std::log(r2 / r1);
  };

  double start = vs[0] < 0 ? opt.r_lo : -1.0;
  if (vs[0] < 0) {
    const double q = local_q(opt.r_lo, 2.0 * opt.r_lo);
    if (!(2.0 * p - p * q > 0.0)) throw NumericalError("ggmt_count: |V_-|^p not integrable at the origin");
    out.integral += std::pow(-vs[0], p) * std::pow(opt.r_lo, 2 * p) / (2.0 * p - p * q);
  }
  for (int i = 1; i < m; ++i) {
    const bool was = vs[i - 1] < 0, is = vs[i] < 0;
    if (!was && is) start = root(xs[i - 1], xs[i]);
    if (was && !is) {
      const double end = root(xs[i - 1], xs[i]);
      out.support.emplace_back(start, end);
      start = -1.0;
    }
  }
  if (start > 0) {
    const double q = local_q(opt.r_hi, 2.0 * opt.r_hi);
    if (!(p * q - 2.0 * p > 0.0)) throw NumericalError("ggmt_count: |V_-|^p tail not integrable");
    out.support.emplace_back(start, opt.r_hi);
    out.integral += std::pow(-vs[m - 1], p) * std::pow(opt.r_hi, 2 * p) / (p * q - 2.0 * p);
  }
  for (const auto& [a, b] : out.support) out.integral += quad::integrate(integrand, a, b, 1e-11);
  out.bigN = out.prefactor * out.integral;
  return out;
}

double u_potential(const PipelineParams& prm, double mu, double r) {
  const double L = ops::big_l(prm.l, prm.alpha);
  return prm.theta * L / (r * r) + (1.0 - 2.0 * prm.alpha) / 4.0 + ops::half_d_d2inv_q(r, prm.alpha) -
         profile::q(r) - prm.l * mu * prm.w(r);
}

GgmtReport l2_pipeline(const PipelineParams& prm) {
  if (!(prm.theta >= 0.0 && prm.theta <= 1.0)) throw PreconditionError("theta must lie in [0, 1]");
  if (!(prm.alpha >= -prm.l && prm.alpha < prm.l + 0.5))
    throw PreconditionError("alpha must lie in [-l, l + 1/2)");
  GgmtReport rep;
  rep.params = prm;
  const AlphaBeta ab = alpha_beta(prm.R);
  rep.alphaR = ab.alphaR;
  rep.betaR = ab.betaR;
  rep.big_l = ops::big_l(prm.l, prm.alpha);
  const double eff = (1.0 - prm.theta) * rep.big_l;
  if (!(eff > 0.75)) throw PreconditionError("(1 - theta) L must exceed 3/4");
  rep.l_eff = std::sqrt(0.25 + eff) - 0.5;
  const MuValue mu = mu_functional(prm.l, prm.alpha, prm.w);
  rep.mu = mu.value;
  rep.mu_exchanged = mu.exchanged;
  rep.u_infinity = (1.0 - 2.0 * prm.alpha) / 4.0 - prm.l * rep.mu * prm.w.at_infinity();
  if (!(rep.u_infinity > 0.0)) throw NumericalError("u_infinity <= 0: U_- is not compactly supported");
  const CountResult cnt = ggmt_count(prm.p, rep.l_eff, [&](double r) { return u_potential(prm, rep.mu, r); });
  rep.prefactor = cnt.prefactor;
  rep.bigN = cnt.bigN;
  rep.support = cnt.support;
  return rep;
}

FormValue coercivity_form(const RadialFunction& f, int l) {
  if (l < 0) throw PreconditionError("coercivity_form: l must be >= 0");
  const RadialGrid& g = f.grid();
  const Eigen::VectorXd w2 = g.r2_weights();
  const RadialFunction df = derivative(f);
  const RadialFunction w = delta_l_inverse(l, f);
  const RadialFunction dw = deriv_deltal_inverse(l, f);
  const double ll = l * (l + 1.0);
  double s = 0.0, nrm = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double r = g[i];
    const double fi = f[i];
    const double term = df[i] * df[i] + ll * fi * fi / (r * r) + 0.25 * fi * fi -
                        1.5 * profile::q(r) * fi * fi +
                        0.5 * dw[i] * dw[i] * profile::third_bound_term(r) -
                        0.5 * ll * w[i] * w[i] * profile::q_deriv(r, 2) / (r * r);
    s += w2[i] * term;
    nrm += w2[i] * fi * fi;
  }
  const double four_pi = 4.0 * std::numbers::pi;
  return {four_pi * s, four_pi * nrm};
}

InterpolationResult interpolation_check(const RadialFunction& f, int l, double R) {
  if (l < 2) throw PreconditionError("interpolation_check: requires l >= 2");
  const RadialGrid& g = f.grid();
  const Eigen::VectorXd w2 = g.r2_weights();
  const RadialFunction w = delta_l_inverse(l, f);
  double lhs = 0.0, fr = 0.0, ff = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double r = g[i];
    const double d = r * (2.0 + r * r);
    lhs += w2[i] * w[i] * w[i] / (d * d);
    fr += w2[i] * f[i] * f[i] / (r * r);
    ff += w2[i] * f[i] * f[i];
  }
  const AlphaBeta ab = alpha_beta(R);
  const double k = (2.0 * l + 1.0) * (2.0 * l + 1.0);
  const double rhs = 4.0 * ab.alphaR / (k * (2.0 * l - 3.0)) * fr + 4.0 * ab.betaR / (k * (2.0 * l - 1.0)) * ff;
  return {lhs, rhs, lhs <= rhs * (1.0 + 1e-6)};
}

L3Constants l3_rational_constants() {
  using boost::multiprecision::cpp_rational;
  auto text = [](const cpp_rational& q) {
    std::ostringstream os;
    os << numerator(q) << "/" << denominator(q);
    return os.str();
  };
  auto make = [&](const cpp_rational& q) { return Rational{text(q), static_cast<double>(q)}; };
  const cpp_rational one(1), seven2(49);
  // α(4) < 2/3 and β(4) = 1/36 enter through the interpolation constants
  const cpp_rational f1 = one - cpp_rational(13, 24) -
                          cpp_rational(68) * 4 * cpp_rational(2, 3) / (cpp_rational(3) * seven2 * 3);
  const cpp_rational f2 = cpp_rational(1, 4) -
                          cpp_rational(68) * 12 * 4 * cpp_rational(1, 36) / (cpp_rational(3) * seven2 * 5);
  L3Constants c;
  c.frac1 = make(f1);
  c.frac1_times12 = make(f1 * 12);
  c.frac2 = make(f2);
  c.frac2_excess = make(f2 - cpp_rational(1, 8));
  c.frac1_matches = f1 == cpp_rational(499, 10584);
  c.frac2_matches = f2 == cpp_rational(1, 8) + cpp_rational(29, 17640);
  return c;
}

QBounds pointwise_q_bounds(const RadialGrid& grid) {
  auto qr2 = [](double r) { return profile::q(r) * r * r; };
  auto q2 = [](double r) { const double d = 2.0 + r * r; return profile::q_deriv(r, 2) * d * d; };
  QBounds b{true, qr2(std::sqrt(6.0)), q2(2.0), profile::third_bound_term(grid[0])};
  for (int i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    b.sup_qr2 = std::max(b.sup_qr2, qr2(r));
    b.sup_q2 = std::max(b.sup_q2, q2(r));
    b.min_third = std::min(b.min_third, profile::third_bound_term(r));
  }
  b.pass = b.sup_qr2 <= 4.5 * (1.0 + 1e-12) && b.sup_q2 <= 136.0 / 3.0 * (1.0 + 1e-12) && b.min_third > 0.0;
  return b;
}

}  // namespace ksmode::ggmt
