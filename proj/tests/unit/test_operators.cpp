#include <doctest.h>

#include <cmath>
#include <random>

#include <ksmode/fd.hpp>
#include <ksmode/ggmt.hpp>
#include <ksmode/operators.hpp>
#include <ksmode/profile.hpp>

using namespace ksmode;
using doctest::Approx;

namespace {

double window_max(const Eigen::VectorXd& v, const RadialGrid& g, double lo, double hi) {
  double m = 0.0;
  for (int i = 0; i < g.size(); ++i)
    if (g[i] >= lo && g[i] <= hi) m = std::max(m, std::abs(v[i]));
  return m;
}

// relative eigen-residual |A f - λ f| / |f| on [0.5, rmax/2]
double mode_residual(int l, int n, double lambda) {
  const GridPtr g = make_grid(n, 40.0);
  const RadialFunction f = l == 0 ? profile::sample_lambda_q(g) : profile::sample_dq(g);
  const OperatorMatrix a = ops::assemble_Ll(l, g);
  const Eigen::VectorXd res = a.apply_nodal(f.values()) - lambda * f.values();
  return window_max(res, *g, 0.5, 20.0) / window_max(f.values(), *g, 0.5, 20.0);
}

double bump(double r) { return r * r * std::exp(-(r - 3) * (r - 3)); }

}  // namespace

TEST_CASE("known modes are discrete eigenfunctions to second order") {
  CHECK(mode_residual(0, 800, -1.0) < 2e-2);
  CHECK(observed_order(mode_residual(0, 400, -1.0), mode_residual(0, 800, -1.0)) >= 1.8);
  CHECK(observed_order(mode_residual(1, 400, -0.5), mode_residual(1, 800, -0.5)) >= 1.8);
}

TEST_CASE("without the profile L_l reduces to -Delta_l + Lambda/2 entrywise") {
  const GridPtr g = make_grid(120, 12.0);
  for (int l : {0, 1, 3}) {
    CAPTURE(l);
    const OperatorMatrix a = ops::assemble_Ll(l, g, {false, InverseForm::kernel});
    const FdOperators fd = fd_operators(*g, origin_closure_for_class(l));
    const Eigen::MatrixXd d1 = fd.d1, d2 = fd.d2;
    const Eigen::VectorXd& r = g->r();
    const int n = g->size();
    for (int i = 0; i < n - 1; ++i)
      for (int j = 0; j < n; ++j) {
        double ref = -d2(i, j) - 2.0 / r[i] * d1(i, j) + 0.5 * r[i] * d1(i, j);
        if (i == j) ref += l * (l + 1.0) / (r[i] * r[i]) + 1.0;
        CHECK(a.entries(i, j) == Approx(ref).epsilon(1e-12).scale(1.0));
      }
    CHECK(a.entries(n - 1, n - 1) == 1.0);
    CHECK(a.entries.row(n - 1).cwiseAbs().sum() == 1.0);
  }
  CHECK_THROWS_AS(ops::assemble_Ll(-1, g), PreconditionError);
}

TEST_CASE("kernel and factorized forms of L_l agree on a smooth function") {
  const GridPtr g = make_grid(800, 40.0);
  const RadialFunction f = RadialFunction::sample(g, bump);
  for (int l : {2, 3}) {
    const Eigen::VectorXd a = ops::assemble_Ll(l, g, {true, InverseForm::kernel}).apply_nodal(f.values());
    const Eigen::VectorXd b = ops::assemble_Ll(l, g, {true, InverseForm::factorized}).apply_nodal(f.values());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5 * a.cwiseAbs().maxCoeff());
    const RadialFunction c = ops::apply_Ll(l, f);
    CHECK(window_max(c.values() - a, *g, 0.0, 20.0) < 1e-6 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("partially localized operator intertwines with L_l") {
  const int l = 2;
  const double alpha = 0.2;
  auto defect = [&](int n) {
    const GridPtr g = make_grid(n, 40.0);
    const RadialFunction f = RadialFunction::sample(g, bump);
    const RadialFunction ra = RadialFunction::sample(g, [&](double r) { return std::pow(r, alpha); });
    const OperatorMatrix tl = ops::assemble_tilde_Ll_alpha(l, alpha, g);
    const RadialFunction lhs = tl.apply(ra * dk_inverse(l + 2, f));
    const RadialFunction rhs = ra * dk_inverse(l + 2, ops::assemble_Ll(l, g).apply(f));
    return window_max((lhs - rhs).values(), *g, 0.5, 20.0) / window_max(rhs.values(), *g, 0.5, 20.0);
  };
  const double c = defect(400), f = defect(800);
  CHECK(f < 1e-3);
  CHECK(observed_order(c, f) >= 1.5);
  const GridPtr g = make_grid(100, 10.0);
  CHECK_THROWS_AS(ops::assemble_tilde_Ll_alpha(2, 2.5, g), PreconditionError);
  CHECK_THROWS_AS(ops::assemble_tilde_Ll_alpha(2, -2.1, g), PreconditionError);
  CHECK_NOTHROW(ops::assemble_tilde_Ll_alpha(2, -2.0, g));
}

TEST_CASE("conjugated nonlocal term obeys its operator bound") {
  const GridPtr g = make_grid(800, 40.0);
  const Eigen::MatrixXd m = ops::tilde_nonlocal_matrix(2, 0.2, g);
  const double c = ops::tilde_nonlocal_bound(2, 0.2);
  CHECK(std::isfinite(c));
  const Eigen::VectorXd w = inner_weights(*g, Weight::flat());
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd v(g->size());
    for (int i = 0; i < v.size(); ++i) v[i] = nd(rng) * std::exp(-(*g)[i] / 8);
    const Eigen::VectorXd mv = m * v;
    const double lhs = std::sqrt((mv.array().square() * w.array()).sum());
    const double rhs = std::sqrt((v.array().square() * w.array()).sum());
    CHECK(lhs <= c * rhs);
  }
}

TEST_CASE("localized l = 1 operators") {
  CHECK(profile::coeff_a(1.0) == Approx(-17.0 / 6.0));
  const GridPtr g = make_grid(400, 40.0);
  const OperatorMatrix t = ops::assemble_tilde_L1(g);
  CHECK(t.entries.allFinite());
  const OperatorMatrix t0 = ops::assemble_tilde_L1(g, false);
  const OperatorMatrix l0 = ops::assemble_Ll(1, g, {false, InverseForm::kernel});
  CHECK((t0.entries - l0.entries).cwiseAbs().maxCoeff() < 1e-10);

  CHECK(ops::tilde_L1_prime_potential(2.0) == Approx(7.0 / 6.0));
  const OperatorMatrix p = ops::assemble_tilde_L1_prime(g);
  CHECK(p.tag == OperatorTag::TildeL1Prime);
  CHECK((p.entries - p.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Schrodinger comparison operator") {
  CHECK(ops::big_l(2, 0.2) == Approx(11.36));
  CHECK(ops::half_d_d2inv_q(0.0, 0.2) == Approx(-2.6));
  for (double r : {0.5, 1.3, 4.0}) {
    const double h = 1e-4;
    const double dd = (profile::d2inv_q_closed(r + h) - profile::d2inv_q_closed(r - h)) / (2 * h);
    CHECK(ops::half_d_d2inv_q(r, 0.2) ==
          Approx(0.5 * (dd + (2 * 0.2 - 4) / r * profile::d2inv_q_closed(r))).epsilon(1e-7));
  }
  const WeightW w;
  const double mu = 1.9137;
  CHECK(ops::h_potential(2, 0.2, w, mu, 1e5) == Approx((1 - 0.4) / 4 - 2 * mu * 0.02).epsilon(1e-6));
  const GridPtr g = make_grid(200, 20.0);
  const OperatorMatrix hm = ops::assemble_H_l_alpha_W(2, 0.2, 0.5, w, mu, g);
  CHECK((hm.entries - hm.entries.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  WeightW bad;
  bad.c0 = 0.0;
  CHECK_THROWS_AS(ops::assemble_H_l_alpha_W(2, 0.2, 0.5, bad, mu, g), PreconditionError);
  CHECK_THROWS_AS(ops::assemble_H_l_alpha_W(2, 0.2, 1.5, w, mu, g), PreconditionError);
}

TEST_CASE("quadratic form of the matrix matches the direct form") {
  for (int l : {3, 4}) {
    CAPTURE(l);
    auto rel = [&](int n) {
      const GridPtr g = make_grid(n, 40.0);
      const RadialFunction f = RadialFunction::sample(g, [&](double r) {
        return std::pow(r, l) * std::exp(-(r - 2) * (r - 2));
      });
      const RadialFunction af = ops::assemble_Ll(l, g).apply(f);
      const double matrix_form = 4 * std::acos(-1.0) * weighted_inner(af, f);
      const double direct = ggmt::coercivity_form(f, l).value;
      return std::abs(matrix_form - direct) / std::abs(direct);
    };
    const double c = rel(400), f = rel(800);
    CHECK(f < 5e-3);
    CHECK(observed_order(c, f) >= 1.8);
  }
}
