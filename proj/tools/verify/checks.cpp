#include "checks.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <ksmode/csv.hpp>
#include <ksmode/evolution.hpp>
#include <ksmode/ggmt.hpp>
#include <ksmode/operators.hpp>
#include <ksmode/profile.hpp>
#include <ksmode/spectra.hpp>
#include <ksmode/waveop.hpp>

namespace ksmode::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Report make(const std::string& command, const RunConfig& cfg) {
  Report r;
  r.command = command;
  r.config_hash = cfg.hash_hex();
  return r;
}

void add_file(Report& rep, const std::string& name) { rep.files.push_back(name); }

double window_max(const RadialFunction& f, double lo, double hi) {
  double m = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double r = f.grid()[i];
    if (r >= lo && r <= hi) m = std::max(m, std::abs(f[i]));
  }
  return m;
}

// max |ℒ_l v - λ v| on [0.5, rmax/2]
double eigen_relation_residual(int l, const GridPtr& g, const RadialFunction& v, double lambda) {
  const RadialFunction res = ops::assemble_Ll(l, g).apply(v) - v * lambda;
  return window_max(res, 0.5, 0.5 * g->rmax());
}

std::vector<int> halving_pair(int n) { return {n / 2, n}; }

bool reference_ggmt_params(const ggmt::PipelineParams& p) {
  const ggmt::PipelineParams d;
  return p.l == d.l && p.alpha == d.alpha && p.p == d.p && p.theta == d.theta && p.w.amp == d.w.amp &&
         p.w.c0 == d.w.c0 && p.w.power == d.w.power && p.w.floor == d.w.floor;
}

}  // namespace

double RandomBump::operator()(double r) const {
  const double x = r / cutoff;
  if (x >= 1.0) return 0.0;
  double s = 0.0;
  for (size_t k = 0; k < c.size(); ++k) s += c[k] * std::exp(-(r - a[k]) * (r - a[k]) / (this->s[k] * this->s[k]));
  return std::pow(r, l) * s * std::exp(1.0 - 1.0 / (1.0 - x * x));
}

RandomBump random_bump(int l, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomBump b;
  b.l = l;
  const int k = 1 + static_cast<int>(u(rng) * 3.0);
  for (int i = 0; i < k; ++i) {
    b.c.push_back(2.0 * u(rng) - 1.0);
    b.a.push_back(6.0 * u(rng));
    b.s.push_back(0.3 + 1.7 * u(rng));
  }
  b.cutoff = 4.0 + 8.0 * u(rng);
  return b;
}

std::vector<Report> run_tasks(const std::vector<std::function<Report()>>& tasks, int threads) {
  std::vector<Report> out(tasks.size());
  if (threads <= 1 || tasks.size() <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) out[i] = tasks[i]();
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(tasks.size());
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int m = std::min<int>(threads, static_cast<int>(tasks.size()));
  for (int t = 0; t < m; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Report profile_check(const RunConfig& cfg, const Env& env) {
  Report rep = make("profile-check", cfg);
  const GridPtr g = cfg.grid();
  const GridPtr gc = cfg.grid(cfg.integer("grid.n") / 2, cfg.num("grid.rmax"));

  rep.at_most("elliptic_residual", "profile equation", profile::profile_residual(*g), 1e-10);
  rep.at_least("elliptic_residual_perturbed", "profile equation (1.01 Q breaks it)",
               profile::profile_residual(*g, 1.01), 1e-3);

  double d2_rel = 0.0;
  for (int k = 0; k <= 60; ++k) {
    const double r = std::pow(10.0, -3.0 + 0.1 * k);
    const double c = profile::d2inv_q_closed(r);
    d2_rel = std::max(d2_rel, std::abs(profile::d2inv_q(r) - c) / std::abs(c));
  }
  rep.at_most("d2inv_q_quadrature_vs_closed", "D_2^{-1}Q = 4r/(2+r^2)", d2_rel, 1e-8);

  const profile::IdentityResiduals ic = profile::identity_residuals(gc);
  const profile::IdentityResiduals iff = profile::identity_residuals(g);
  rep.at_most("identity_ii", "Q' identity with D_2^{-1}Q", iff.ii, 1e-9);
  rep.at_most("identity_iii", "g/G identity", iff.iii, 1e-6);
  rep.at_least("identity_i_order", "L_1 dQ = -1/2 dQ (two-grid order)", observed_order(ic.i, iff.i), 1.8);

  const double e0c = eigen_relation_residual(0, gc, profile::sample_lambda_q(gc), -1.0);
  const double e0f = eigen_relation_residual(0, g, profile::sample_lambda_q(g), -1.0);
  rep.at_least("L0_LambdaQ_order", "L_0 LambdaQ = -LambdaQ (two-grid order)", observed_order(e0c, e0f), 1.8);
  const double e1c = eigen_relation_residual(1, gc, profile::sample_dq(gc), -0.5);
  const double e1f = eigen_relation_residual(1, g, profile::sample_dq(g), -0.5);
  rep.at_least("L1_dQ_order", "L_1 dQ = -1/2 dQ (two-grid order)", observed_order(e1c, e1f), 1.8);

  const ggmt::QBounds qb = ggmt::pointwise_q_bounds(*g);
  rep.at_most("sup_Q_r2", "Q <= 9/2 r^-2", qb.sup_qr2, 4.5 * (1 + 1e-12));
  rep.at_most("sup_Q2_weighted", "Q'' (2+r^2)^2 <= 136/3", qb.sup_q2, 136.0 / 3.0 * (1 + 1e-12));
  rep.at_least("min_third_term", "(d_r - 2/r) Q' > 0", qb.min_third, 0.0);

  // kernel vs factorized Δ_l^{-1}: random resolved functions (gating) and
  // white noise (informational; not a grid function, so only O(h^4) agreement)
  std::mt19937_64 rng(cfg.integer("coercivity.seed"));
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  double kf = 0.0, kf_noise = 0.0;
  for (int l = 1; l <= 4; ++l) {
    const Eigen::MatrixXd a = delta_l_inverse_matrix(g, l, InverseForm::kernel);
    const Eigen::MatrixXd b = delta_l_inverse_matrix(g, l, InverseForm::factorized);
    for (int t = 0; t < 10; ++t) {
      double ctr[3], wid[3], amp[3];
      for (int k = 0; k < 3; ++k) {
        ctr[k] = 10.0 * ud(rng);
        wid[k] = 1.0 + 2.0 * ud(rng);
        amp[k] = nd(rng);
      }
      Eigen::VectorXd v(g->size()), z(g->size());
      for (int i = 0; i < v.size(); ++i) {
        const double r = (*g)[i];
        v[i] = 0.0;
        for (int k = 0; k < 3; ++k) v[i] += amp[k] * std::exp(-(r - ctr[k]) * (r - ctr[k]) / (wid[k] * wid[k]));
        z[i] = nd(rng);
      }
      kf = std::max(kf, (a * v - b * v).cwiseAbs().maxCoeff() / (a * v).cwiseAbs().maxCoeff());
      kf_noise = std::max(kf_noise, (a * z - b * z).cwiseAbs().maxCoeff() / (a * z).cwiseAbs().maxCoeff());
    }
  }
  rep.at_most("deltal_inverse_kernel_vs_factorized", "kernel and factorized Delta_l^{-1}", kf, 1e-6);
  {
    auto& c = rep.at_most("deltal_inverse_kernel_vs_factorized_noise", "kernel and factorized Delta_l^{-1} (white noise)",
                          kf_noise, 1e-6);
    c.gating = false;
    c.note = "white noise is not a resolved grid function";
  }

  const RadialFunction q = profile::sample_q(g), dq = profile::sample_dq(g), lq = profile::sample_lambda_q(g);
  const RadialFunction d2 = RadialFunction::sample(g, profile::d2inv_q_closed);
  csv::write_functions(env.out / "profile.csv", *g, {{"Q", &q}, {"dQ", &dq}, {"LambdaQ", &lq}, {"D2invQ", &d2}});
  add_file(rep, "profile.csv");
  return rep;
}

Report ggmt_check(const RunConfig& cfg, const Env& env) {
  Report rep = make("ggmt", cfg);
  const ggmt::PipelineParams prm = cfg.ggmt();
  const auto t0 = Clock::now();
  const ggmt::GgmtReport g = ggmt::l2_pipeline(prm);
  const double secs = seconds_since(t0);

  rep.at_most("N_below_one", "count bound N < 1", g.bigN, 1.0 - 1e-12);
  rep.at_most("mu_fubini_rel_diff", "mu by both integration orders",
              std::abs(g.mu - g.mu_exchanged) / g.mu, 1e-4);
  rep.at_least("u_infinity_positive", "limit of U positive", g.u_infinity, 1e-12);
  rep.at_least("leff_condition", "(1-theta) L > 3/4", (1.0 - prm.theta) * g.big_l, 0.75 + 1e-12);
  rep.at_most("runtime_s", "pipeline runtime", secs, 30.0);
  {
    auto& c = rep.near("u_infinity", "limit of U", g.u_infinity, g.u_infinity, 0.0);
    c.gating = false;
    c.note = "informational";
  }
  if (reference_ggmt_params(prm)) {
    rep.near("mu", "mu[W^-1] ~ 1.9137", g.mu, 1.9137, 5e-3);
    rep.near("N", "N ~ 0.8687", g.bigN, 0.8687, 5e-3);
    rep.near("l_eff", "l_eff ~ 1.9352", g.l_eff, 1.9352, 1e-3);
    const OperatorMatrix h = ops::assemble_H_l_alpha_W(prm.l, prm.alpha, prm.theta, prm.w, g.mu, cfg.grid());
    rep.at_least("H_min_ritz", "no non-positive eigenvalue of H", spectra::schrodinger_spectrum_check(h).min_ritz, 1e-12);
    // N non-increasing in l over l_eff ± 0.5
    bool mono = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = -5; k <= 5; ++k) {
      const double n = ggmt::ggmt_count(prm.p, g.l_eff + 0.1 * k,
                                        [&](double r) { return ggmt::u_potential(prm, g.mu, r); })
                           .bigN;
      mono = mono && n <= prev * (1 + 1e-12);
      prev = n;
    }
    rep.flag("N_monotone_in_l", "prefactor decreasing in l", mono);
  }

  const ggmt::AlphaBeta ab = ggmt::alpha_beta(prm.R), aq = ggmt::alpha_beta_quadrature(prm.R);
  rep.at_most("alphaR_closed_vs_quadrature", "alpha(R)", std::abs(ab.alphaR - aq.alphaR), 1e-10);
  rep.at_most("betaR_closed_vs_quadrature", "beta(R)", std::abs(ab.betaR - aq.betaR), 1e-10);
  if (prm.R == 4.0) {
    rep.near("beta4", "beta(4) = 1/36", ab.betaR, 1.0 / 36.0, 1e-15);
    rep.near("alpha4", "alpha(4) ~ 0.6542", ab.alphaR, 0.6542, 1e-4);
    rep.at_most("alpha4_below_two_thirds", "alpha(4) < 2/3", ab.alphaR, 2.0 / 3.0 - 1e-12);
  }
  const ggmt::L3Constants lc = ggmt::l3_rational_constants();
  rep.flag("frac1_exact", "499/10584", lc.frac1_matches, lc.frac1.text + " (x12 = " + lc.frac1_times12.text + ")");
  rep.flag("frac2_exact", "1/8 + 29/17640", lc.frac2_matches, lc.frac2.text);
  rep.flag("frac_positive", "frac1 > 0 and frac2 > 1/8", lc.frac1.value > 0 && lc.frac2_excess.value > 0);

  std::vector<double> rs, us;
  for (int k = 0; k <= 400; ++k) {
    const double r = std::pow(10.0, -2.0 + 4.0 * k / 400.0);
    rs.push_back(r);
    us.push_back(ggmt::u_potential(prm, g.mu, r));
  }
  csv::write_columns(env.out / "ggmt_potential.csv", {"r", "U"}, {rs, us});
  add_file(rep, "ggmt_potential.csv");
  return rep;
}

Report spectrum_check(const RunConfig& cfg, const Env& env, int l) {
  Report rep = make("spectrum-l" + std::to_string(l), cfg);
  const spectra::ScanConfig sc = cfg.scan();
  const auto t0 = Clock::now();
  const spectra::ScanResult res = spectra::unstable_scan(l, sc);
  const double secs = seconds_since(t0);

  const int expected = l <= 1 ? 1 : 0;
  rep.near("accepted_count", "unstable set size", static_cast<double>(res.accepted.size()), expected, 0.0);
  if (expected == 1 && res.accepted.size() == 1) {
    const spectra::EigenReport& a = res.accepted.front();
    const double target = l == 0 ? -1.0 : -0.5;
    rep.near("eigenvalue", l == 0 ? "lambda = -1" : "lambda = -1/2", a.lambda.real(), target, sc.abs_tol);
    rep.at_most("eigenvalue_imag", "real eigenvalue", std::abs(a.lambda.imag()), sc.abs_tol);
    if (a.mode) {
      const GridPtr& g = a.mode->grid_ptr();
      const RadialFunction ref = l == 0 ? profile::sample_lambda_q(g) : profile::sample_dq(g);
      rep.at_least("eigenvector_cosine", l == 0 ? "mode ~ LambdaQ" : "mode ~ dQ",
                   spectra::cosine_similarity(*a.mode, ref), 0.999);
    }
  }
  {
    auto& c = rep.at_most("runtime_s", "scan runtime", secs, 600.0);
    c.gating = false;
  }
  csv::write_scan(env.out / ("spectrum_l" + std::to_string(l) + ".csv"), res);
  add_file(rep, "spectrum_l" + std::to_string(l) + ".csv");
  return rep;
}

Report waveop_check(const RunConfig& cfg, const Env& env) {
  Report rep = make("waveop-check", cfg);
  const double rmax = cfg.num("grid.rmax");
  const std::vector<int> ns = halving_pair(cfg.integer("grid.n"));
  const GridPtr g = cfg.grid(ns[1], rmax);
  const waveop::WaveOpContext ctx = waveop::WaveOpContext::make(g);

  const RadialFunction dq = profile::sample_dq(g);
  const RadialFunction tdq = waveop::apply_T(ctx, dq);
  rep.at_most("T_dQ_relative", "T dQ = 0", norm_r2(tdq) / norm_r2(dq), 1e-5);

  const RadialFunction rr = RadialFunction::sample(g, [](double r) { return r; });
  const RadialFunction tr = waveop::apply_T(ctx, rr);
  double e_plus = 0.0, e_printed = 0.0;
  for (int i = 0; i < g->size(); ++i) {
    const double r = (*g)[i], c = 4.0 * r * r * r / (5.0 * (r * r + 2.0));
    e_plus = std::max(e_plus, std::abs(tr[i] - c));
    e_printed = std::max(e_printed, std::abs(tr[i] + c));
  }
  rep.at_most("T_r_cancellation", "T[r] = 4r^3/(5(r^2+2))", e_plus, 1e-8);
  {
    auto& c = rep.at_most("T_r_printed_sign", "T[r] = -4r^3/(5(r^2+2)) as printed", e_printed, 1e-8);
    c.gating = false;
    c.note = "printed sign disagrees with the algebra; see T_r_cancellation";
  }

  const RadialFunction tro = waveop::apply_T_omega(ctx, rr);
  double om = 0.0;
  for (int i = 0; i < g->size(); ++i) om = std::max(om, std::abs(tro[i] - tr[i]) / (1.0 + std::abs(tr[i])));
  rep.at_most("T_omega_agreement", "T = T_omega", om, 1e-4);

  {
    const RadialFunction f = RadialFunction::sample(g, [](double r) { return r * std::exp(-r * r / 4); });
    const RadialFunction h = RadialFunction::sample(g, [](double r) { return r / std::pow(1 + r * r, 3); });
    const RadialFunction lhs = waveop::apply_T(ctx, f * 2.5 - h * 0.75);
    const RadialFunction rhs = waveop::apply_T(ctx, f) * 2.5 - waveop::apply_T(ctx, h) * 0.75;
    rep.at_most("T_linearity", "T linear", (lhs - rhs).values().cwiseAbs().maxCoeff(), 1e-12);
    const auto ofit = loglog_slope(waveop::apply_T(ctx, f), (*g)[0], std::max(10 * (*g)[0], (*g)[2]));
    rep.at_least("T_origin_exponent", "T maps r to r^2 behaviour", ofit, 2.0 - 0.3);
  }

  const waveop::CoefficientIdentities ci = waveop::coefficient_identities(ctx);
  rep.at_most("coefficient_identity_A", "r^3 g/G + A = A_0", ci.a_defect, 1e-8);
  rep.at_most("coefficient_identity_B", "B_0 identity", ci.b_defect, 1e-8);
  rep.near("U1_at_1", "U_1(1) = e^{1/8}/3", std::exp(0.125 - std::log(3.0)), std::exp(0.125) / 3.0, 1e-14);

  const std::vector<std::pair<std::string, std::function<double(double)>>> tests{
      {"r_gauss", [](double r) { return r * std::exp(-r * r / 4); }},
      {"dQ", [](double r) { return profile::q_deriv(r, 1); }},
      {"r_rational", [](double r) { return r / std::pow(1 + r * r, 3); }}};
  const GridPtr gc = cfg.grid(ns[0], rmax);
  const waveop::WaveOpContext cc = waveop::WaveOpContext::make(gc);
  for (const auto& [name, fn] : tests) {
    const double rc = waveop::commutator_residual(cc, RadialFunction::sample(gc, fn));
    const double rf = waveop::commutator_residual(ctx, RadialFunction::sample(g, fn));
    rep.at_least("commutator_order_" + name, "T L_1 = tilde-L_1 T (two-grid order)", observed_order(rc, rf), 1.8);
  }
  rep.at_least("log_U1_order", "d_r log U_1 = A/2 (two-grid order)",
               observed_order(waveop::log_u1_defect(cc), waveop::log_u1_defect(ctx)), 1.8);
  {
    auto bump = [](double r) { return std::exp(-(r - 5) * (r - 5)); };
    const double rc = waveop::conjugation_residual(cc, RadialFunction::sample(gc, bump));
    const double rf = waveop::conjugation_residual(ctx, RadialFunction::sample(g, bump));
    rep.at_least("conjugation_order", "U_1^-1 tilde-L_1 U_1 = tilde-L_1' (two-grid order)", observed_order(rc, rf), 1.8);
  }
  {
    const GridPtr wide = cfg.grid(2 * ns[1], 2 * rmax);
    const waveop::WaveOpContext wc = waveop::WaveOpContext::make(wide);
    bool threw = false;
    try {
      waveop::conjugation_residual(wc, RadialFunction::sample(wide, [](double r) { return std::exp(-(r - 70) * (r - 70)); }));
    } catch (const PreconditionError&) {
      threw = true;
    }
    rep.flag("conjugation_overflow_guard", "support near r = 70 rejected", threw);
  }

  const waveop::PotentialMin pm = waveop::potential_min_tilde_L1_prime();
  rep.near("potential_min", "min of tilde-L_1' potential ~ 0.408", pm.value, 0.408, 0.002);
  rep.at_least("potential_min_above_2_5", "spectrum in [2/5, inf)", pm.value, 0.4);
  rep.near("potential_at_2", "potential(2) = 7/6", ops::tilde_L1_prime_potential(2.0), 7.0 / 6.0, 1e-13);
  const spectra::RitzCheck rc = spectra::schrodinger_spectrum_check(ops::assemble_tilde_L1_prime(g));
  rep.at_least("tilde_L1_prime_min_ritz", "spectrum in [2/5, inf)", rc.min_ritz, 0.39);
  rep.at_least("ritz_above_min_potential", "Ritz values >= min potential", rc.min_ritz - rc.min_potential, 0.0);

  const waveop::NonvanishingResult nv = waveop::nonvanishing_check([](double r) { return profile::q_deriv(r, 1); });
  rep.flag("nonvanishing_dQ", "D_3^{-1} dQ keeps one sign", nv.pass);
  rep.near("nonvanishing_value_at_1", "D_3^{-1} dQ (1) = -8/9", nv.value_at_one, -8.0 / 9.0, 1e-4);
  const waveop::NonvanishingResult bad = waveop::nonvanishing_check(
      [](double r) { return profile::q_deriv(r, 1) + 5.0 * std::exp(-4.0 * (r - 3) * (r - 3)); });
  rep.flag("nonvanishing_counterexample_fails", "sign change detected", !bad.pass,
           "bracket [" + csv::format(bad.bracket.first) + ", " + csv::format(bad.bracket.second) + "]");

  csv::write_functions(env.out / "waveop.csv", *g, {{"T_dQ", &tdq}, {"T_r", &tr}, {"T_omega_r", &tro}});
  add_file(rep, "waveop.csv");
  return rep;
}

Report coercivity_check(const RunConfig& cfg, const Env& env) {
  Report rep = make("coercivity", cfg);
  const GridPtr g = cfg.grid();
  const int samples = cfg.integer("coercivity.samples");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("coercivity.seed"));
  const double R = cfg.num("ggmt.R");
  std::vector<double> col_l, col_k, col_form, col_norm, col_lhs, col_rhs;
  int form_bad = 0, ip_bad = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (int l : cfg.int_list("coercivity.ls")) {
    for (int k = 0; k < samples; ++k) {
      const RandomBump b = random_bump(l, seed * 1000003ull + 7919ull * l + k);
      const RadialFunction f = RadialFunction::sample(g, b);
      const ggmt::FormValue fv = ggmt::coercivity_form(f, l);
      const ggmt::InterpolationResult ip = ggmt::interpolation_check(f, l, R);
      if (!(fv.value >= fv.norm_sq / 8.0)) ++form_bad;
      if (!ip.pass) ++ip_bad;
      min_ratio = std::min(min_ratio, fv.value / fv.norm_sq);
      col_l.push_back(l);
      col_k.push_back(k);
      col_form.push_back(fv.value);
      col_norm.push_back(fv.norm_sq);
      col_lhs.push_back(ip.lhs);
      col_rhs.push_back(ip.rhs);
    }
  }
  rep.at_most("form_violations", "Re(L_l f, f) >= |f|^2/8", form_bad, 0.0);
  rep.at_most("interpolation_violations", "nonlocal interpolation bound", ip_bad, 0.0);
  rep.at_least("min_form_ratio", "Re(L_l f, f)/|f|^2", min_ratio, 0.125);
  csv::write_columns(env.out / "coercivity.csv", {"l", "sample", "form", "norm_sq", "interp_lhs", "interp_rhs"},
                     {col_l, col_k, col_form, col_norm, col_lhs, col_rhs});
  add_file(rep, "coercivity.csv");
  return rep;
}

Report evolve_linear_check(const RunConfig& cfg, const Env& env) {
  Report rep = make("evolve-linear", cfg);
  const int n = cfg.integer("evolve.n");
  const double rmax = cfg.num("evolve.rmax"), dt = cfg.num("evolve.dt");
  const GridPtr g = cfg.grid(n, rmax);
  const auto t0 = Clock::now();

  const evolution::EvolutionTrace t0trace = evolution::linear_evolve(0, profile::sample_lambda_q(g), dt, 3.0);
  const double rate0 = evolution::fit_growth_rate(t0trace, 0.0, 3.0);
  rep.near("growth_rate_l0", "-L_0 LambdaQ = LambdaQ", rate0, 1.0, 0.02);
  const evolution::EvolutionTrace t1trace = evolution::linear_evolve(1, profile::sample_dq(g), dt, 3.0);
  rep.near("growth_rate_l1", "-L_1 dQ = dQ/2", evolution::fit_growth_rate(t1trace, 0.0, 3.0), 0.5, 0.02);

  const spectra::ProjectionPair proj = evolution::unstable_projection(0, g);
  rep.near("unstable_modes_l0", "one discrete unstable mode", static_cast<double>(proj.left_modes.size()), 1.0, 0.0);
  const RadialFunction s0 = proj.stable(RadialFunction::sample(g, [](double r) { return std::exp(-r * r); }));
  const evolution::EvolutionTrace st = evolution::linear_evolve(0, s0, dt, 6.0, &proj);
  const double decay = -evolution::fit_growth_rate(st, 1.0, 6.0);
  rep.flag("stable_decay", "stable data decays", decay > 0.0, "fitted rate " + csv::format(decay));

  // CN amplification and coefficient commutation on the unstable mode
  double lam_min = std::numeric_limits<double>::infinity();
  for (const auto& z : spectra::eigenvalues(ops::assemble_Ll(0, g).interior())) lam_min = std::min(lam_min, z.real());
  const evolution::EvolutionTrace mt = evolution::linear_evolve(0, proj.right_modes.front(), dt, 3.0, &proj);
  const double amp = (1.0 - 0.5 * dt * lam_min) / (1.0 + 0.5 * dt * lam_min);
  double amp_err = 0.0;
  for (size_t k = 1; k < mt.mode_coeffs.size(); ++k)
    amp_err = std::max(amp_err, std::abs(mt.mode_coeffs[k][0] / mt.mode_coeffs[k - 1][0] - amp));
  rep.at_most("cn_amplification", "CN factor on the discrete eigenpair", amp_err, 1e-6);
  const double ratio = mt.mode_coeffs.back()[0] / mt.mode_coeffs.front()[0];
  rep.at_most("coefficient_commutes_with_flow", "c(tau) = c(0) e^{-lambda tau}",
              std::abs(ratio / std::exp(-lam_min * 3.0) - 1.0), 1e-3);

  const GridPtr g2 = cfg.grid(2 * n, rmax);
  const double rate0_fine =
      evolution::fit_growth_rate(evolution::linear_evolve(0, profile::sample_lambda_q(g2), dt, 3.0), 0.0, 3.0);
  rep.at_most("refinement_consistency_l0", "rate change under doubling n", std::abs(rate0_fine - rate0), 0.02);
  {
    auto& c = rep.at_most("runtime_s", "evolution runtime", seconds_since(t0), 600.0);
    c.gating = false;
  }

  csv::write_trace(env.out / "linear_l0_LambdaQ.csv", t0trace);
  csv::write_trace(env.out / "linear_l1_dQ.csv", t1trace);
  csv::write_trace(env.out / "linear_l0_stable.csv", st);
  for (const char* f : {"linear_l0_LambdaQ.csv", "linear_l1_dQ.csv", "linear_l0_stable.csv"}) add_file(rep, f);
  return rep;
}

Report evolve_nonlinear_check(const RunConfig& cfg, const Env& env) {
  Report rep = make("evolve-nonlinear", cfg);
  const int n = cfg.integer("evolve.n");
  const double rmax = cfg.num("evolve.rmax"), dt = cfg.num("evolve.dt");
  const double horizon = cfg.num("evolve.horizon"), amp = cfg.num("evolve.amplitude");
  const GridPtr g = cfg.grid(n, rmax);
  const double h = rmax / n;
  const double bound = 10.0 * (h * h + dt * dt);
  const RadialFunction q = profile::sample_q(g);
  const double qn = norm_r2(q);

  auto max_rel = [&](const evolution::EvolutionTrace& t) {
    double m = 0.0;
    for (double x : t.norms) m = std::max(m, x / qn);
    return m;
  };
  const evolution::EvolutionTrace steady = evolution::nonlinear_radial_evolve(q, dt, horizon);
  rep.at_most("steady_state_drift", "Q is a steady state", max_rel(steady), bound);
  {
    evolution::NonlinearOptions direct;
    direct.well_balanced = false;
    double v = std::numeric_limits<double>::quiet_NaN();
    try {
      v = max_rel(evolution::nonlinear_radial_evolve(q, dt, horizon, direct));
    } catch (const NumericalError&) {
    }
    auto& c = rep.at_most("steady_state_drift_direct_form", "Q is a steady state (direct Psi form)", v, bound);
    c.gating = false;
    c.note = "O(h^2) residual amplified by the unstable mode";
  }

  const spectra::ProjectionPair proj = evolution::unstable_projection(0, g);
  evolution::NonlinearOptions with_proj;
  with_proj.proj = &proj;
  const RadialFunction lq = profile::sample_lambda_q(g);
  const evolution::EvolutionTrace grow = evolution::nonlinear_radial_evolve(q + lq * amp, dt, 3.0, with_proj);
  rep.near("LambdaQ_coefficient_rate", "linearization predicts rate 1", evolution::fit_coeff_rate(grow, 0, 0.0, 3.0),
           1.0, 0.05);

  const RadialFunction sb = proj.stable(RadialFunction::sample(g, [](double r) { return std::exp(-r * r); }));
  const RadialFunction pert = q + sb * (amp / norm_r2(sb));
  const evolution::EvolutionTrace st = evolution::nonlinear_radial_evolve(pert, dt, 6.0, with_proj);
  bool decreasing = true;
  for (size_t k = 1; k < st.times.size(); ++k)
    if (st.times[k] > 1.0 && st.norms[k] > st.norms[k - 1] * (1 + 1e-12)) decreasing = false;
  rep.flag("stable_perturbation_decreasing", "|Psi - Q| decreasing on [1, 6]", decreasing);
  {
    auto& c = rep.flag("boundary_monitor", "|eps(rmax)| <= 1e-6 |Psi|_inf", !st.boundary_flag,
                       "max ratio " + csv::format(st.max_boundary_ratio));
    c.gating = false;
  }

  // dt convergence of the perturbed run (drift of Q is identically zero here)
  Eigen::VectorXd e[3];
  for (int k = 0; k < 3; ++k)
    e[k] = evolution::nonlinear_radial_evolve(pert, 2.0 * dt / (1 << k), 2.0).final_state->values();
  rep.near("dt_halving_ratio", "second order in dt", (e[0] - e[1]).norm() / (e[1] - e[2]).norm(), 4.0, 1.0);

  // N(Q) against Q^2 + Q' D_2^{-1} Q
  auto nq_err = [](const GridPtr& gg) {
    const RadialFunction nq = evolution::nonlinear_term(profile::sample_q(gg));
    double m = 0.0;
    for (int i = 0; i < gg->size(); ++i) {
      const double r = (*gg)[i];
      m = std::max(m, std::abs(nq[i] - (profile::q(r) * profile::q(r) + profile::q_deriv(r, 1) * profile::d2inv_q_closed(r))));
    }
    return m;
  };
  rep.at_least("nonlinear_term_order", "N(Q) = Q^2 + Q' D_2^{-1}Q (two-grid order)",
               observed_order(nq_err(g), nq_err(cfg.grid(2 * n, rmax))), 1.8);
  {
    const RadialFunction n1 = evolution::nonlinear_term(sb), n2 = evolution::nonlinear_term(sb * 2.0);
    rep.at_most("nonlinear_term_quadratic", "N(2e) = 4N(e)",
                (n2 - n1 * 4.0).values().cwiseAbs().maxCoeff() / std::max(n2.values().cwiseAbs().maxCoeff(), 1e-300), 1e-12);
  }

  const double pdt = 1e-3;
  const double mnorm = 4.0 * std::numbers::pi * PowerIntegrator(g, 2.0).from_origin(q.values()).cwiseAbs().maxCoeff();
  rep.at_most("partial_mass_defect", "partial mass equation, one step at Q",
              evolution::partial_mass_crosscheck(q, pdt), 10.0 * (h * h + pdt * pdt) * mnorm);
  rep.at_most("partial_mass_defect_zero", "partial mass equation at 0",
              evolution::partial_mass_crosscheck(RadialFunction::zero(g), pdt), 0.0);
  {
    auto& c = rep.at_most("partial_mass_defect_bump", "partial mass equation near Q",
                          evolution::partial_mass_crosscheck(pert, pdt), 10.0 * (h * h + pdt * pdt) * mnorm);
    c.gating = false;
  }

  csv::write_trace(env.out / "nonlinear_steady.csv", steady);
  csv::write_trace(env.out / "nonlinear_LambdaQ.csv", grow);
  csv::write_trace(env.out / "nonlinear_stable.csv", st);
  for (const char* f : {"nonlinear_steady.csv", "nonlinear_LambdaQ.csv", "nonlinear_stable.csv"}) add_file(rep, f);
  return rep;
}

Report shoot_check(const RunConfig& cfg, const Env& env) {
  Report rep = make("shoot", cfg);
  const GridPtr g = cfg.grid(cfg.integer("evolve.n"), cfg.num("evolve.rmax"));
  evolution::ShootingOptions opt;
  opt.dt = cfg.num("shoot.dt");
  opt.horizon = cfg.num("shoot.horizon");
  const double b = cfg.num("shoot.bracket");
  const double amps[2] = {cfg.num("evolve.amplitude"), cfg.num("evolve.amplitude2")};

  const spectra::ProjectionPair proj = evolution::unstable_projection(0, g);
  const RadialFunction sb = proj.stable(RadialFunction::sample(g, [](double r) { return std::exp(-r * r); }));
  const RadialFunction unit = sb * (1.0 / norm_r2(sb));

  const evolution::ShootingResult s0 = evolution::shoot_stable_manifold(RadialFunction::zero(g), -b, 2.0 * b, opt);
  rep.at_most("a_star_zero_data", "Q itself is on the manifold", std::abs(s0.a_star), 10.0 * opt.rel_tol * 3.0 * b);

  evolution::ShootingResult sr[2];
  for (int k = 0; k < 2; ++k) sr[k] = evolution::shoot_stable_manifold(unit * amps[k], -b, b, opt);
  rep.flag("shoot_converged", "bisection converged", sr[0].converged && sr[1].converged);
  rep.at_most("a_star_small", "|a*| <= 1e-4 at the first amplitude", std::abs(sr[0].a_star), 1e-4);
  const double expo = std::log(std::abs(sr[1].a_star / sr[0].a_star)) / std::log(amps[1] / amps[0]);
  rep.at_least("a_star_scaling_exponent", "a* quadratically small", expo, 1.5);

  {
    const evolution::NonlinearStepper stepper(g, opt.dt);
    const RadialFunction e1 = unit * amps[0];
    const double tube = opt.tube_factor * std::max(norm_r2(e1), b);
    const double w = std::max(sr[0].bracket_width, 1e-15);
    const int lo = evolution::departure_sign(stepper, proj, e1, sr[0].a_star - 10 * w, tube, opt.horizon);
    const int hi = evolution::departure_sign(stepper, proj, e1, sr[0].a_star + 10 * w, tube, opt.horizon);
    rep.flag("departure_signs_differ", "a* +- 10 tol depart in opposite directions", lo != 0 && hi != 0 && lo != hi);
  }

  nlohmann::json j = nlohmann::json::array();
  const double sizes[3] = {0.0, amps[0], amps[1]};
  const evolution::ShootingResult* all[3] = {&s0, &sr[0], &sr[1]};
  for (int k = 0; k < 3; ++k)
    j.push_back({{"perturbation_size", sizes[k]},
                 {"a_star", all[k]->a_star},
                 {"bracket_width", all[k]->bracket_width},
                 {"converged", all[k]->converged},
                 {"departure_sign_low", all[k]->departure_sign_low},
                 {"departure_sign_high", all[k]->departure_sign_high}});
  std::filesystem::create_directories(env.out);
  std::ofstream(env.out / "shooting.json") << j.dump(2) << '\n';
  add_file(rep, "shooting.json");
  return rep;
}

Report verify_all(const RunConfig& cfg, const Env& env) {
  std::vector<std::function<Report()>> tasks{
      [&] { return profile_check(cfg, env); },    [&] { return ggmt_check(cfg, env); },
      [&] { return waveop_check(cfg, env); },     [&] { return coercivity_check(cfg, env); },
      [&] { return evolve_linear_check(cfg, env); }, [&] { return evolve_nonlinear_check(cfg, env); },
      [&] { return shoot_check(cfg, env); }};
  for (int l = 0; l <= 6; ++l) tasks.push_back([&, l] { return spectrum_check(cfg, env, l); });
  const std::vector<Report> parts = run_tasks(tasks, env.threads);
  Report all = make("verify-all", cfg);
  for (const Report& p : parts) all.append(p);
  return all;
}

}  // namespace ksmode::verify
