#include <doctest.h>

#include <chrono>
#include <cmath>

#include <ksmode/ggmt.hpp>
#include <ksmode/operators.hpp>
#include <ksmode/quadrature.hpp>

using namespace ksmode;
using doctest::Approx;

TEST_CASE("alpha and beta") {
  const ggmt::AlphaBeta ab = ggmt::alpha_beta(4.0);
  CHECK(ab.betaR == Approx(1.0 / 36.0).epsilon(1e-15));
  CHECK(ab.alphaR == Approx(std::log(3.0) + 1.0 / 18.0 - 0.5).epsilon(1e-13));
  CHECK(ab.alphaR == Approx(0.65417).epsilon(1e-5));
  CHECK(ab.alphaR < 2.0 / 3.0);
  // independent quadrature of the defining integrals
  const double a = quad::integrate([](double r) { return std::pow(r, 3) / std::pow(2 + r * r, 2); }, 0.0, 4.0);
  const double b = quad::integrate_to_infinity([](double r) { return r / std::pow(2 + r * r, 2); }, 4.0);
  CHECK(std::abs(ab.alphaR - a) <= 1e-10);
  CHECK(std::abs(ab.betaR - b) <= 1e-10);
  const ggmt::AlphaBeta q = ggmt::alpha_beta_quadrature(4.0);
  CHECK(std::abs(q.alphaR - a) <= 1e-10);
  CHECK(std::abs(q.betaR - b) <= 1e-10);
  const ggmt::AlphaBeta small = ggmt::alpha_beta(1e-6);
  CHECK(std::abs(small.alphaR) < 1e-10);
  CHECK(small.betaR == Approx(0.25).epsilon(1e-10));
  CHECK_THROWS_AS(ggmt::alpha_beta(0.0), PreconditionError);
}

TEST_CASE("W_1 potential") {
  CHECK(ggmt::w1_potential(1.8, 0.0) == Approx(8.6));
  const double r = 1e4;
  CHECK(ggmt::w1_potential(1.8, r) * std::pow(r, 4) == Approx(8 * 1.8 + 4).epsilon(1e-6));
  CHECK_THROWS_AS(ggmt::w1_potential(-0.5, 1.0), PreconditionError);
}

TEST_CASE("mu functional") {
  const ggmt::MuValue m = ggmt::mu_functional(2, 0.2, WeightW{});
  CHECK(m.value == Approx(1.9137).epsilon(5e-3 / 1.9137));
  CHECK(m.rel_diff <= 1e-4);
  // linear in W^{-1}
  const WeightW w2{2.0, 0.01, 1.2, 0.04};
  CHECK(ggmt::mu_functional(2, 0.2, w2).value == Approx(m.value / 2).epsilon(1e-8));
  const WeightW one{0.0, 0.01, 1.2, 1.0};
  const double c = ggmt::mu_functional(2, 0.2, one).value;
  CHECK(std::isfinite(c));
  CHECK(c > 0);
  const WeightW weak{1.0, 0.01, 2.0, 0.0};  // r^-4 violates the decay condition
  CHECK_THROWS_AS(ggmt::mu_functional(2, 0.2, weak), PreconditionError);
}

TEST_CASE("GGMT count") {
  CHECK(ggmt::prefactor(4.0, 0.0) == Approx(14.765625).epsilon(1e-13));
  CHECK(ggmt::prefactor(4.0, 1.0) == Approx(14.765625 / std::pow(3.0, 7)).epsilon(1e-13));
  CHECK(ggmt::ggmt_count(4.0, 0.0, [](double r) { return 1.0 + r; }).bigN == 0.0);
  // V = r^2 - 1 on [0, 1]: ∫ r^7 (1 - r^2)^4 dr = B(4, 5)/2 = 1/560
  const ggmt::CountResult c =
      ggmt::ggmt_count(4.0, 0.0, [](double r) { return r < 1.0 ? r * r - 1.0 : 0.0; });
  CHECK(c.integral == Approx(1.0 / 560.0).epsilon(1e-7));
  CHECK(c.bigN == Approx(14.765625 / 560.0).epsilon(1e-7));
  CHECK_THROWS_AS(ggmt::ggmt_count(4.0, 0.0, [](double r) { return -1.0 / (1.0 + r); }), NumericalError);
  CHECK_THROWS_AS(ggmt::prefactor(1.0, 0.0), PreconditionError);
}

TEST_CASE("l = 2 pipeline") {
  const auto t0 = std::chrono::steady_clock::now();
  const ggmt::GgmtReport r = ggmt::l2_pipeline();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs <= 30.0);
  CHECK(r.big_l == Approx(11.36));
  CHECK(r.l_eff == Approx(std::sqrt(0.25 + 5.68) - 0.5).epsilon(1e-12));
  CHECK(r.mu == Approx(1.9137).epsilon(5e-3 / 1.9137));
  CHECK(r.bigN == Approx(0.8687).epsilon(5e-3 / 0.8687));
  CHECK(r.bigN < 1.0);
  CHECK(r.u_infinity > 0.0);
  CHECK(r.u_infinity == Approx((1 - 0.4) / 4 - 2 * r.mu * 0.02).epsilon(1e-12));
  CHECK(ggmt::u_potential(r.params, r.mu, 1e6) == Approx(r.u_infinity).epsilon(1e-6));
  REQUIRE_FALSE(r.support.empty());
  for (const auto& [a, b] : r.support) {
    CHECK(ggmt::u_potential(r.params, r.mu, 0.5 * (a + b)) < 0.0);
  }
}

TEST_CASE("coercivity form and interpolation bound") {
  const GridPtr g = make_grid(800, 40.0);
  const RadialFunction f3 = RadialFunction::sample(g, [](double r) { return std::pow(r, 3) * std::exp(-r * r); });
  const ggmt::FormValue fv = ggmt::coercivity_form(f3, 3);
  CHECK(fv.value >= fv.norm_sq / 8.0);
  CHECK(fv.norm_sq == Approx(4 * std::acos(-1.0) * weighted_inner(f3, f3)));
  const ggmt::FormValue z = ggmt::coercivity_form(RadialFunction::zero(g), 3);
  CHECK(z.value == 0.0);
  CHECK(z.norm_sq == 0.0);

  const RadialFunction f2 = RadialFunction::sample(g, [](double r) { return r * r * std::exp(-r); });
  const ggmt::InterpolationResult ip = ggmt::interpolation_check(f2, 2, 4.0);
  CHECK(ip.pass);
  CHECK(ip.lhs <= ip.rhs);
  const ggmt::InterpolationResult iz = ggmt::interpolation_check(RadialFunction::zero(g), 3, 4.0);
  CHECK(iz.lhs == 0.0);
  CHECK(iz.rhs == 0.0);
  CHECK_THROWS_AS(ggmt::interpolation_check(f2, 1, 4.0), PreconditionError);
}

TEST_CASE("exact rationals") {
  const ggmt::L3Constants c = ggmt::l3_rational_constants();
  CHECK(c.frac1.text == "499/10584");
  CHECK(c.frac1_times12.text == "499/882");
  CHECK(c.frac2.text == "1117/8820");
  CHECK(c.frac2_excess.text == "29/17640");
  CHECK(c.frac1_matches);
  CHECK(c.frac2_matches);
  CHECK(c.frac1.value > 0.0);
  CHECK(c.frac2.value > 0.125);
}

TEST_CASE("pointwise profile bounds") {
  const ggmt::QBounds b = ggmt::pointwise_q_bounds(*make_grid(2000, 100.0));
  CHECK(b.pass);
  CHECK(b.sup_qr2 <= 4.5);
  CHECK(b.sup_q2 <= 136.0 / 3.0);
  CHECK(b.min_third > 0.0);
}
