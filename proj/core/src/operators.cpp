#include "ksmode/operators.hpp"

#include <cmath>
#include <string>

#include "ksmode/fd.hpp"
#include "ksmode/profile.hpp"
#include "ksmode/quadrature.hpp"

namespace ksmode {

double WeightW::operator()(double r) const {
  return amp * std::pow(c0 + r * r, -power) + floor;
}

void WeightW::validate(double l, double alpha) const {
  if (!(amp >= 0.0) || !(floor >= 0.0) || !(power >= 0.0) || amp + floor <= 0.0)
    throw PreconditionError("W: amp, floor, power must be >= 0 and W nonzero");
  if (amp > 0.0 && power > 0.0 && !(c0 > 0.0))
    throw PreconditionError("W: c0 must be positive so that W(0) is finite");
  if (floor > 0.0) return;
  const double need = std::min(2.0 * l + 2.0 * alpha - 1.0, 2.0);
  if (!(2.0 * power < need))
    throw PreconditionError("W: decay r^-" + std::to_string(2.0 * power) +
                            " violates the positivity/decay condition (need slower than r^-" +
                            std::to_string(need) + ")");
}

const char* tag_name(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::Ll: return "Ll";
    case OperatorTag::TildeLlAlpha: return "TildeLlAlpha";
    case OperatorTag::TildeL1: return "TildeL1";
    case OperatorTag::TildeL1Prime: return "TildeL1Prime";
    case OperatorTag::HlAlphaW: return "HlAlphaW";
  }
  return "?";
}

Eigen::MatrixXd OperatorMatrix::interior() const {
  const int m = size() - 1;
  return entries.topLeftCorner(m, m);
}

Eigen::VectorXd OperatorMatrix::apply_nodal(const Eigen::VectorXd& v) const {
  if (similarity.size() == 0) return entries * v;
  return (entries * similarity.cwiseProduct(v)).cwiseQuotient(similarity);
}

RadialFunction OperatorMatrix::apply(const RadialFunction& f) const {
  if (f.size() != size()) throw PreconditionError("OperatorMatrix::apply: size mismatch");
  return {f.grid_ptr(), apply_nodal(f.values())};
}

namespace ops {

namespace {

using Coef = Eigen::VectorXd;

Coef sample(const RadialGrid& g, double (*fn)(double)) {
  Coef c(g.size());
  for (int i = 0; i < g.size(); ++i) c[i] = fn(g[i]);
  return c;
}

// c2 f'' + c1 f' + c0 f as a dense matrix.
Eigen::MatrixXd local_part(const RadialGrid& grid, OriginClosure closure, const Coef& c2,
                           const Coef& c1, const Coef& c0) {
  const FdOperators fd = fd_operators(grid, closure);
  Eigen::MatrixXd d2 = Eigen::MatrixXd(fd.d2);
  Eigen::MatrixXd d1 = Eigen::MatrixXd(fd.d1);
  Eigen::MatrixXd m = c2.asDiagonal() * d2 + c1.asDiagonal() * d1;
  m.diagonal() += c0;
  return m;
}

void set_dirichlet(Eigen::MatrixXd& m) {
  const int e = static_cast<int>(m.rows()) - 1;
  m.row(e).setZero();
  m(e, e) = 1.0;
}

// Symmetric -∂^2 + V with ghost zero at the origin and Dirichlet at rmax.
OperatorMatrix schrodinger(const GridPtr& grid, const Coef& v, OperatorTag tag, int l,
                           double origin_exponent) {
  const auto& r = grid->r();
  const int n = grid->size();
  Eigen::VectorXd mass(n), s(n);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double hm = i == 0 ? r[0] : r[i] - r[i - 1];
    const double hp = r[i + 1] - r[i];
    mass[i] = 0.5 * (hm + hp);
    k(i, i) = (1.0 / hm + 1.0 / hp) / mass[i] + v[i];
    if (i > 0) k(i, i - 1) = -1.0 / (hm * mass[i]);
    k(i, i + 1) = -1.0 / (hp * mass[i]);
  }
  mass[n - 1] = 0.5 * (r[n - 1] - r[n - 2]);
  for (int i = 0; i < n; ++i) s[i] = std::sqrt(mass[i]);
  Eigen::MatrixXd sym = s.asDiagonal() * k * s.cwiseInverse().asDiagonal();
  sym.row(n - 1).setZero();
  sym.col(n - 1).setZero();
  sym(n - 1, n - 1) = 1.0;
  sym = 0.5 * (sym + sym.transpose()).eval();
  return {grid, l, tag, std::move(sym), {origin_exponent, true}, std::move(s), v};
}

double v1(double r) { return profile::aux_potentials(r).v1; }
double v2(double r) { return profile::aux_potentials(r).v2; }

}  // namespace

OperatorMatrix assemble_Ll(int l, const GridPtr& grid, const LlOptions& opt) {
  if (l < 0) throw PreconditionError("assemble_Ll: l must be >= 0");
  const auto& r = grid->r();
  const int n = grid->size();
  Coef c2 = Coef::Constant(n, -1.0), c1(n), c0(n);
  for (int i = 0; i < n; ++i) {
    c1[i] = -2.0 / r[i] + 0.5 * r[i];
    c0[i] = l * (l + 1.0) / (r[i] * r[i]) + 1.0;
    if (opt.include_profile) {
      c1[i] -= profile::d2inv_q_closed(r[i]);
      c0[i] -= 2.0 * profile::q(r[i]);
    }
  }
  Eigen::MatrixXd m = local_part(*grid, origin_closure_for_class(l), c2, c1, c0);
  if (opt.include_profile) {
    const Coef dq = sample(*grid, [](double x) { return profile::q_deriv(x, 1); });
    m -= dq.asDiagonal() * deriv_deltal_inverse_matrix(grid, l, opt.form);
  }
  set_dirichlet(m);
  return {grid, l, OperatorTag::Ll, std::move(m), {static_cast<double>(l), true}, {}, {}};
}

RadialFunction apply_Ll(int l, const RadialFunction& f, const LlOptions& opt) {
  if (l < 0) throw PreconditionError("apply_Ll: l must be >= 0");
  const auto& r = f.grid().r();
  const FdOperators fd = fd_operators(f.grid(), origin_closure_for_class(l));
  const Eigen::VectorXd d1 = fd.d1 * f.values();
  const Eigen::VectorXd d2 = fd.d2 * f.values();
  Eigen::VectorXd out(f.size());
  for (int i = 0; i < f.size(); ++i) {
    out[i] = -d2[i] - 2.0 / r[i] * d1[i] + l * (l + 1.0) / (r[i] * r[i]) * f[i] +
             0.5 * r[i] * d1[i] + f[i];
    if (opt.include_profile)
      out[i] -= 2.0 * profile::q(r[i]) * f[i] + profile::d2inv_q_closed(r[i]) * d1[i];
  }
  if (opt.include_profile) {
    const RadialFunction nl = deriv_deltal_inverse(l, f, opt.form);
    for (int i = 0; i < f.size(); ++i) out[i] -= profile::q_deriv(r[i], 1) * nl[i];
  }
  return {f.grid_ptr(), std::move(out)};
}

Eigen::MatrixXd tilde_nonlocal_matrix(int l, double alpha, const GridPtr& grid) {
  const double k = l + 2.0 - alpha;
  const Eigen::MatrixXd dk = dk_inverse_matrix(grid, k);
  const Coef a = sample(*grid, v1);
  const Coef b = sample(*grid, v2);
  return dk * a.asDiagonal() + dk * b.asDiagonal() * dk_inverse_matrix(grid, -l - alpha);
}

double tilde_nonlocal_bound(int l, double alpha) {
  const double k = l + 2.0 - alpha;
  const double beta = 2.0 * l + 2.0 * alpha - 1.0;
  if (!(beta > 0.0)) throw PreconditionError("tilde_nonlocal_bound: need 2l + 2α > 1");
  const double na = std::sqrt(quad::nested_from_origin(
      [k](double s) { const double v = v1(s); return v * v * std::pow(s, 2 * k); },
      [k](double r, double in) { return std::pow(r, -2 * k) * in; }));
  const double nb = std::sqrt(quad::nested_from_origin(
      [k](double s) { return v2(s) * std::pow(s, k + 0.5); },
      [k, beta](double r, double in) { const double b = std::pow(r, -k) * in; return b * b / beta; }));
  return na + nb;
}

OperatorMatrix assemble_tilde_Ll_alpha(int l, double alpha, const GridPtr& grid) {
  if (l < 0) throw PreconditionError("assemble_tilde_Ll_alpha: l must be >= 0");
  if (!(alpha >= -l && alpha < l + 0.5))
    throw PreconditionError("assemble_tilde_Ll_alpha: alpha must lie in [-l, l + 1/2)");
  const auto& r = grid->r();
  const int n = grid->size();
  Coef c2 = Coef::Constant(n, -1.0), c1(n), c0(n);
  for (int i = 0; i < n; ++i) {
    const double x = r[i];
    const double d = profile::d2inv_q_closed(x);
    c1[i] = -(2.0 - 2.0 * alpha) / x + 0.5 * x - d;
    c0[i] = (alpha - alpha * alpha + (l + 1.0) * (l + 2.0)) / (x * x) + 0.5 * (1.0 - alpha) -
            d * (2.0 - alpha) / x - profile::q(x);
  }
  Eigen::MatrixXd m = local_part(*grid, OriginClosure::vanish, c2, c1, c0);
  if (l > 0) m += l * tilde_nonlocal_matrix(l, alpha, grid);
  set_dirichlet(m);
  return {grid, l, OperatorTag::TildeLlAlpha, std::move(m), {l + 1.0 + alpha, true}, {}, {}};
}

OperatorMatrix assemble_tilde_L1(const GridPtr& grid, bool include_profile) {
  const auto& r = grid->r();
  const int n = grid->size();
  Coef c2 = Coef::Constant(n, -1.0), c1(n), c0(n);
  for (int i = 0; i < n; ++i) {
    const double x = r[i];
    if (include_profile) {
      c1[i] = profile::coeff_a(x);
      c0[i] = profile::coeff_b(x);
    } else {
      c1[i] = -2.0 / x + 0.5 * x;
      c0[i] = 2.0 / (x * x) + 1.0;
    }
  }
  Eigen::MatrixXd m = local_part(*grid, OriginClosure::vanish, c2, c1, c0);
  set_dirichlet(m);
  return {grid, 1, OperatorTag::TildeL1, std::move(m), {2.0, true}, {}, {}};
}

double tilde_L1_prime_potential(double r) {
  return 12.0 / (r * r) + r * r / 16.0 - 8.0 / (2.0 + r * r) - 0.75;
}

OperatorMatrix assemble_tilde_L1_prime(const GridPtr& grid) {
  return schrodinger(grid, sample(*grid, tilde_L1_prime_potential), OperatorTag::TildeL1Prime, 1, 4.0);
}

double big_l(int l, double alpha) { return -(alpha - 1.0) * (alpha - 1.0) + (l + 1.0) * (l + 2.0); }

double half_d_d2inv_q(double r, double alpha) {
  const double d = 2.0 + r * r;
  return 2.0 * (2.0 - r * r) / (d * d) + 2.0 * (2.0 * alpha - 4.0) / d;
}

double h_potential(int l, double alpha, const WeightW& w, double mu, double r) {
  return big_l(l, alpha) / (r * r) + (1.0 - 2.0 * alpha) / 4.0 + half_d_d2inv_q(r, alpha) -
         profile::q(r) - l * mu * w(r);
}

OperatorMatrix assemble_H_l_alpha_W(int l, double alpha, double theta, const WeightW& w,
                                    double mu, const GridPtr& grid) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw PreconditionError("assemble_H_l_alpha_W: theta must lie in [0, 1]");
  w.validate(l, alpha);
  Coef v(grid->size());
  for (int i = 0; i < grid->size(); ++i) v[i] = h_potential(l, alpha, w, mu, (*grid)[i]);
  const double L = big_l(l, alpha);
  return schrodinger(grid, v, OperatorTag::HlAlphaW, l, 0.5 + std::sqrt(0.25 + L));
}

}  // namespace ops
}  // namespace ksmode
