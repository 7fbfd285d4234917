#include "ksmode/waveop.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <sstream>

#include "ksmode/error.hpp"
#include "ksmode/profile.hpp"

namespace ksmode::waveop {

namespace {

double max_abs(const Eigen::VectorXd& v, int first, int last) {
  double m = 0.0;
  for (int i = first; i < last; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

int first_at_least(const RadialGrid& g, double r) {
  int i = 0;
  while (i < g.size() - 1 && g[i] < r) ++i;
  return i;
}

}  // namespace

WaveOpContext WaveOpContext::make(const GridPtr& grid) {
  return {grid,
          RadialFunction::sample(grid, [](double r) { return profile::g_over_G(r); }),
          RadialFunction::sample(grid, profile::coeff_a),
          RadialFunction::sample(grid, profile::coeff_b),
          RadialFunction::sample(grid, [](double r) {
            return r * r / 8.0 - std::log(r * (2.0 + r * r));
          })};
}

RadialFunction apply_T(const WaveOpContext& ctx, const RadialFunction& f) {
  require_same_grid(f, ctx.gOverG);
  const PowerIntegrator cube(ctx.grid, 3.0);
  const Eigen::VectorXd cum = cube.from_origin(f.values());
  return {ctx.grid, f.values() - ctx.gOverG.values().cwiseProduct(cum)};
}

RadialFunction apply_T_omega(const WaveOpContext& ctx, const RadialFunction& f) {
  require_same_grid(f, ctx.gOverG);
  const RadialFunction dq = profile::sample_dq(ctx.grid);
  const Eigen::VectorXd omega =
      ctx.grid->r().array().cube() / -dq.values().array();
  // ω carries the factor s^3, which the product rule integrates exactly.
  const Eigen::VectorXd omega_red = omega.array() / ctx.grid->r().array().cube();
  const PowerIntegrator cube(ctx.grid, 3.0);
  const Eigen::VectorXd num = cube.from_origin(f.values().cwiseProduct(dq.values()).cwiseProduct(omega_red));
  const Eigen::VectorXd den = cube.from_origin(dq.values().cwiseProduct(dq.values()).cwiseProduct(omega_red));
  return {ctx.grid, f.values() - num.cwiseQuotient(den).cwiseProduct(dq.values())};
}

CoefficientIdentities coefficient_identities(const WaveOpContext& ctx) {
  CoefficientIdentities out{0.0, 0.0};
  const RadialGrid& g = *ctx.grid;
  for (int i = 0; i < g.size(); ++i) {
    const double r = g[i];
    const double phi = ctx.gOverG[i];
    const double d2q = profile::d2inv_q_closed(r);
    const double q = profile::q(r);
    const double a0 = -2.0 / r + 0.5 * r + phi * r * r * r - d2q;
    const double b0 = 2.0 / (r * r) + 1.0 - 2.0 * q + phi * (-r * r - 0.5 * std::pow(r, 4) + d2q * r * r * r);
    const double ea = std::abs(r * r * r * phi + ctx.A[i] - a0) / (1.0 + std::abs(a0));
    const double eb = std::abs(2.0 * profile::g_over_G(r, 1) * r * r * r + 3.0 * r * r * phi -
                               ctx.A[i] * phi * r * r * r + ctx.B[i] - b0) /
                      (1.0 + std::abs(b0));
    out.a_defect = std::max(out.a_defect, ea);
    out.b_defect = std::max(out.b_defect, eb);
  }
  return out;
}

double log_u1_defect(const WaveOpContext& ctx) {
  const RadialFunction d = derivative(ctx.log_u1);
  return max_abs(d.values() - 0.5 * ctx.A.values(), first_at_least(*ctx.grid, kWindowStart),
                 ctx.grid->size());
}

double commutator_residual(const WaveOpContext& ctx, const RadialFunction& f) {
  require_same_grid(f, ctx.gOverG);
  const OperatorMatrix l1 = ops::assemble_Ll(1, ctx.grid);
  const OperatorMatrix tl1 = ops::assemble_tilde_L1(ctx.grid);
  const RadialFunction lhs = apply_T(ctx, l1.apply(f));
  const RadialFunction rhs = tl1.apply(apply_T(ctx, f));
  const RadialGrid& g = *ctx.grid;
  return max_abs(lhs.values() - rhs.values(), first_at_least(g, kWindowStart),
                 first_at_least(g, 0.5 * g.rmax()) + 1);
}

double conjugation_residual(const WaveOpContext& ctx, const RadialFunction& g,
                            double max_radius) {
  require_same_grid(g, ctx.gOverG);
  const RadialGrid& grid = *ctx.grid;
  const int n = grid.size();
  const double gmax = g.values().cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (grid[i] > max_radius && std::abs(g[i]) > 1e-14 * gmax) {
      std::ostringstream os;
      os << "conjugation_residual: g is not negligible at r = " << grid[i]
         << "; U_1 ~ e^{r^2/8} overflows, restrict the support to r <= " << max_radius;
      throw PreconditionError(os.str());
    }
  }
  // U_1 is only formed where g is supported; elsewhere U_1 g is set to 0.
  Eigen::VectorXd u1(n), ug(n);
  for (int i = 0; i < n; ++i) {
    const bool live = grid[i] <= max_radius + 1.0;
    u1[i] = live ? std::exp(ctx.log_u1[i]) : 0.0;
    ug[i] = live ? u1[i] * g[i] : 0.0;
  }
  const Eigen::VectorXd lhs = ops::assemble_tilde_L1(ctx.grid).apply_nodal(ug);
  const Eigen::VectorXd rhs = ops::assemble_tilde_L1_prime(ctx.grid).apply_nodal(g.values());
  double m = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    if (grid[i] > max_radius) break;
    m = std::max(m, std::abs(lhs[i] / u1[i] - rhs[i]));
  }
  return m;
}

PotentialMin potential_min_tilde_L1_prime() {
  const double lo = 0.1, hi = 50.0;
  const int m = 4000;
  int best = 0, local_minima = 0;
  std::vector<double> v(m);
  auto x = [&](int i) { return lo + (hi - lo) * i / (m - 1.0); };
  for (int i = 0; i < m; ++i) {
    v[i] = ops::tilde_L1_prime_potential(x(i));
    if (v[i] < v[best]) best = i;
  }
  for (int i = 1; i + 1 < m; ++i)
    if (v[i] < v[i - 1] && v[i] <= v[i + 1]) ++local_minima;
  if (local_minima != 1) throw NumericalError("potential_min_tilde_L1_prime: scan is not unimodal");
  const auto res = boost::math::tools::brent_find_minima(
      ops::tilde_L1_prime_potential, x(std::max(best - 1, 0)), x(std::min(best + 1, m - 1)), 52);
  return {res.first, res.second};
}

NonvanishingResult nonvanishing_check(const std::function<double(double)>& sampler, double rmax,
                                      int n) {
  const GridPtr grid = make_grid(n, rmax);
  const RadialFunction f = RadialFunction::sample(grid, sampler);
  const RadialFunction d = dk_inverse(3.0, f);
  const RadialGrid& g = *grid;
  NonvanishingResult out;
  const double scale = d.values().cwiseAbs().maxCoeff();
  out.sign = d[0] > 0 ? 1 : (d[0] < 0 ? -1 : 0);
  {
    // linear interpolation of the node values to r = 1
    int i = 0;
    while (i + 2 < g.size() && g[i + 1] < 1.0) ++i;
    const double t = (1.0 - g[i]) / (g[i + 1] - g[i]);
    out.value_at_one = (1.0 - t) * d[i] + t * d[i + 1];
  }
  out.pass = out.sign != 0;
  for (int i = 0; i < g.size() && out.pass; ++i) {
    const double r = g[i];
    const double margin = 1e-6 * scale * r * r / ((1.0 + r * r) * (1.0 + r * r));
    if (out.sign * d[i] < margin) {
      out.pass = false;
      out.bracket = {i > 0 ? g[i - 1] : 0.0, r};
    }
  }
  return out;
}

}  // namespace ksmode::waveop
