#include <doctest.h>

#include <cmath>
#include <numbers>

#include <ksmode/fd.hpp>
#include <ksmode/quadrature.hpp>
#include <ksmode/radial.hpp>

using namespace ksmode;
using doctest::Approx;

namespace {

double max_err_on(const RadialFunction& f, double (*exact)(double, int), int l, double lo, double hi) {
  double m = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double r = f.grid()[i];
    if (r >= lo && r <= hi) m = std::max(m, std::abs(f[i] - exact(r, l)));
  }
  return m;
}

// f_l = r^l e^{-r^2} and its images under Δ_l and ∂_r
double bump(double r, int l) { return std::pow(r, l) * std::exp(-r * r); }
double bump_laplacian(double r, int l) { return bump(r, l) * (4 * r * r - 4 * l - 6); }
double bump_deriv(double r, int l) { return (l * std::pow(r, l - 1) - 2 * std::pow(r, l + 1)) * std::exp(-r * r); }

}  // namespace

TEST_CASE("grids") {
  const GridPtr g = make_grid(100, 20.0);
  CHECK(g->size() == 100);
  CHECK(g->rmax() == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(g->is_uniform());
  const GridPtr s = make_grid(100, 20.0, Stretch::geometric(1.02));
  CHECK_FALSE(s->is_uniform());
  CHECK(s->rmax() == doctest::Approx(20.0).epsilon(1e-12));
  const double h0 = (*s)[1] - (*s)[0], h1 = (*s)[2] - (*s)[1];
  CHECK(h1 / h0 == doctest::Approx(1.02).epsilon(1e-10));
  CHECK_THROWS_AS(make_grid(8, 10.0), PreconditionError);
  CHECK_THROWS_AS(make_grid(100, -1.0), PreconditionError);
  CHECK_THROWS_AS(make_grid(100, 1.0, Stretch::geometric(-2.0)), PreconditionError);
}

TEST_CASE("functions on different grids do not mix") {
  const GridPtr a = make_grid(50, 10.0), b = make_grid(60, 10.0);
  const RadialFunction fa = RadialFunction::zero(a), fb = RadialFunction::zero(b);
  CHECK_THROWS_AS(fa + fb, PreconditionError);
  CHECK_THROWS_AS(RadialFunction(a, Eigen::VectorXd::Zero(3)), PreconditionError);
}

TEST_CASE("Fornberg weights reproduce the centred stencils") {
  const double h = 0.1;
  const Eigen::MatrixXd c = fd_weights(1.0, {1.0 - h, 1.0, 1.0 + h}, 2);
  CHECK(c(0, 1) == doctest::Approx(-0.5 / h));
  CHECK(c(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c(2, 1) == doctest::Approx(0.5 / h));
  CHECK(c(0, 2) == doctest::Approx(1 / (h * h)));
  CHECK(c(1, 2) == doctest::Approx(-2 / (h * h)));
  CHECK(c(2, 2) == doctest::Approx(1 / (h * h)));
}

TEST_CASE("product integration is exact on cubics against s^q") {
  for (const GridPtr& g : {make_grid(64, 5.0), make_grid(64, 5.0, Stretch::geometric(1.03))}) {
    const RadialFunction u = RadialFunction::sample(g, [](double r) { return r * r * r - r; });
    const PowerIntegrator p(g, 2.0);
    const Eigen::VectorXd from = p.from_origin(u.values());
    const Eigen::VectorXd to = p.to_outer(u.values());
    auto prim = [](double r) { return std::pow(r, 6) / 6 - std::pow(r, 4) / 4; };
    for (int i = 0; i < g->size(); ++i) {
      const double r = (*g)[i];
      CHECK(from[i] == doctest::Approx(prim(r)).epsilon(1e-11));
      CHECK(to[i] + prim(r) == doctest::Approx(prim(5.0)).epsilon(1e-11));
    }
    const Eigen::VectorXd viam = p.from_origin_matrix() * u.values();
    CHECK((viam - from).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("power-law tail") {
  const GridPtr g = make_grid(400, 40.0);
  const RadialFunction f = RadialFunction::sample(g, [](double r) { return std::pow(r, -4.0); });
  CHECK(power_tail(f, 2.0) == doctest::Approx(1.0 / 40.0).epsilon(1e-10));
  const RadialFunction e = RadialFunction::sample(g, [](double r) { return std::exp(-r * r); });
  CHECK(power_tail(e, 2.0) == 0.0);
  const RadialFunction osc = RadialFunction::sample(g, [](double r) { return std::sin(r) / (r * r); });
  CHECK_THROWS_AS(power_tail(osc, 0.0), NumericalError);
}

TEST_CASE("D_k inverses against closed forms") {
  const GridPtr g = make_grid(800, 40.0);
  const RadialFunction f = RadialFunction::sample(g, [](double r) { return std::exp(-r * r); });
  const RadialFunction d3 = dk_inverse(3, f);
  const RadialFunction f2 = RadialFunction::sample(g, [](double r) { return r * r * std::exp(-r * r); });
  const RadialFunction dm2 = dk_inverse(-2, f2);
  double e3 = 0.0, em2 = 0.0;
  for (int i = 0; i < g->size(); ++i) {
    const double r = (*g)[i];
    e3 = std::max(e3, std::abs(d3[i] - (1 - (1 + r * r) * std::exp(-r * r)) / (2 * r * r * r)));
    em2 = std::max(em2, std::abs(dm2[i] + r * r * std::sqrt(std::numbers::pi) / 2 * std::erfc(r)));
  }
  CHECK(e3 < 1e-6);
  CHECK(em2 < 1e-6);
  // D_k D_k^{-1} = id
  const RadialFunction back = dk_apply(3, d3);
  double eb = 0.0;
  for (int i = 0; i < g->size(); ++i)
    if ((*g)[i] >= 0.5 && (*g)[i] <= 10) eb = std::max(eb, std::abs(back[i] - f[i]));
  CHECK(eb < 1e-3);
}

TEST_CASE("Delta_l is second order on r^l e^{-r^2}") {
  for (int l = 0; l <= 3; ++l) {
    auto err = [&](int n) {
      const GridPtr g = make_grid(n, 20.0);
      return max_err_on(delta_l_apply(l, RadialFunction::sample(g, [&](double r) { return bump(r, l); })),
                        bump_laplacian, l, 0.5, 10.0);
    };
    CAPTURE(l);
    CHECK(observed_order(err(200), err(400)) > 1.8);
  }
  CHECK_THROWS_AS(delta_l_apply(-1, RadialFunction::zero(make_grid(20, 1.0))), PreconditionError);
}

TEST_CASE("Delta_l inverse recovers r^l e^{-r^2} in both forms") {
  const GridPtr g = make_grid(800, 40.0);
  for (int l = 0; l <= 4; ++l) {
    CAPTURE(l);
    const RadialFunction rhs = RadialFunction::sample(g, [&](double r) { return bump_laplacian(r, l); });
    for (InverseForm form : {InverseForm::kernel, InverseForm::factorized}) {
      CHECK(max_err_on(delta_l_inverse(l, rhs, form), bump, l, 0.0, 40.0) < 1e-5);
      CHECK(max_err_on(deriv_deltal_inverse(l, rhs, form), bump_deriv, l, 0.5, 40.0) < 1e-5);
    }
    const Eigen::MatrixXd mk = delta_l_inverse_matrix(g, l, InverseForm::kernel);
    const Eigen::VectorXd viam = mk * rhs.values();
    CHECK((viam - delta_l_inverse(l, rhs).values()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("weighted inner products and fits") {
  const GridPtr g = make_grid(800, 40.0);
  const RadialFunction e = RadialFunction::sample(g, [](double r) { return std::exp(-r * r / 2); });
  const RadialFunction one = RadialFunction::sample(g, [](double) { return 1.0; });
  CHECK(weighted_inner(e, e) == doctest::Approx(std::sqrt(std::numbers::pi) / 4).epsilon(1e-8));
  CHECK(norm_r2(e) == doctest::Approx(std::sqrt(std::sqrt(std::numbers::pi) / 4)).epsilon(1e-8));
  CHECK(weighted_inner(e, one, Weight::flat()) ==
        doctest::Approx(std::sqrt(std::numbers::pi / 2) * std::erf((*g)[g->size() - 1] / std::sqrt(2.0)) / 1.0 -
                        std::sqrt(std::numbers::pi / 2) * std::erf((*g)[0] / std::sqrt(2.0)))
            .epsilon(1e-5));
  const RadialFunction p = RadialFunction::sample(g, [](double r) { return std::pow(r, -3.0); });
  CHECK(loglog_slope(p, 5.0, 30.0) == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(std::isnan(loglog_slope(p, 100.0, 200.0)));
  CHECK(richardson(1.0 + 0.04, 1.0 + 0.01, 2.0) == doctest::Approx(1.0));
  CHECK(observed_order(4e-4, 1e-4) == doctest::Approx(2.0));
}

TEST_CASE("nested quadrature from the origin") {
  CHECK(quad::nested_from_origin([](double s) { return std::exp(-s); },
                                 [](double r, double in) { return in * std::exp(-r); }) == Approx(0.5).epsilon(1e-12));
  // I = r^3/3; ∫ r^6/(9 (1 + r^2)^5) dr = B(7/2, 3/2)/18
  const double exact = std::tgamma(3.5) * std::tgamma(1.5) / std::tgamma(5.0) / 18.0;
  CHECK(quad::nested_from_origin([](double s) { return s * s; },
                                 [](double r, double in) { return in * in / std::pow(1 + r * r, 5); }) ==
        Approx(exact).epsilon(1e-10));
  CHECK_THROWS_AS(quad::nested_from_origin([](double s) { return s; }, [](double, double in) { return in; }, 1e-3, 1e3),
                  NumericalError);
  CHECK(quad::integrate([](double x) { return x * x; }, 0.0, 3.0) == Approx(9.0).epsilon(1e-13));
  CHECK(quad::integrate_to_infinity([](double x) { return 1.0 / (x * x * x); }, 1.0) == Approx(0.5).epsilon(1e-9));
}
