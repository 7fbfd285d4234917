// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed here.
// Exit status is 0 when every failing sub-check is on the known list.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <ksmode/evolution.hpp>
#include <ksmode/ggmt.hpp>
#include <ksmode/operators.hpp>
#include <ksmode/profile.hpp>
#include <ksmode/radial.hpp>
#include <ksmode/spectra.hpp>
#include <ksmode/waveop.hpp>

using namespace ksmode;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Sub {
  std::string name;
  bool pass;
  std::string detail;
  bool known = false;  // expected to fail; see README
};

struct Criterion {
  Criterion() = default;
  Criterion(int i, std::string t) : id(i), title(std::move(t)) {}

  int id = 0;
  std::string title;
  std::vector<Sub> subs;

  void check(std::string name, bool pass, std::string detail = {}) {
    subs.push_back({std::move(name), pass, std::move(detail)});
  }
  void known_failure(std::string name, bool pass, std::string detail) {
    subs.push_back({std::move(name), pass, std::move(detail), true});
  }
};

std::string num(double x) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6g", x);
  return b;
}

// max over the window [0.5, rmax/2] of |A f - λ f|, relative to f there
double eigen_residual(int l, int n, double lambda) {
  const GridPtr g = make_grid(n, 40.0);
  const RadialFunction f = l == 0 ? profile::sample_lambda_q(g) : profile::sample_dq(g);
  const Eigen::VectorXd res = ops::assemble_Ll(l, g).apply_nodal(f.values()) - lambda * f.values();
  double m = 0.0, s = 0.0;
  for (int i = 0; i < g->size(); ++i) {
    const double r = (*g)[i];
    if (r < 0.5 || r > 20.0) continue;
    m = std::max(m, std::abs(res[i]));
    s = std::max(s, std::abs(f[i]));
  }
  return m / s;
}

// r^l Σ c_k exp(-(r - a_k)^2 / s_k^2) times a smooth cutoff at R_c
std::function<double(double)> random_function(int l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int k = 1 + static_cast<int>(3.0 * u(rng));
  std::vector<double> c, a, s;
  for (int i = 0; i < k; ++i) {
    c.push_back(2.0 * u(rng) - 1.0);
    a.push_back(6.0 * u(rng));
    s.push_back(0.3 + 1.7 * u(rng));
  }
  const double rc = 4.0 + 8.0 * u(rng);
  return [=](double r) {
    const double x = r / rc;
    if (x >= 1.0) return 0.0;
    double v = 0.0;
    for (int i = 0; i < k; ++i) v += c[i] * std::exp(-(r - a[i]) * (r - a[i]) / (s[i] * s[i]));
    return std::pow(r, l) * v * std::exp(1.0 - 1.0 / (1.0 - x * x));
  };
}

Criterion c1() {
  Criterion c{1, "GGMT reproduction"};
  const auto t0 = Clock::now();
  const ggmt::GgmtReport r = ggmt::l2_pipeline();
  const double secs = since(t0);
  c.check("mu", std::abs(r.mu - 1.9137) <= 5e-3, num(r.mu));
  c.check("N", std::abs(r.bigN - 0.8687) <= 5e-3, num(r.bigN));
  c.check("N<1", r.bigN < 1.0);
  c.check("runtime", secs <= 30.0, num(secs) + " s");
  return c;
}

Criterion c2() {
  Criterion c{2, "constants"};
  const ggmt::AlphaBeta ab = ggmt::alpha_beta(4.0);
  const ggmt::AlphaBeta q = ggmt::alpha_beta_quadrature(4.0);
  c.check("beta_closed", ab.betaR == 1.0 / 36.0, num(ab.betaR));
  c.check("beta_quadrature", std::abs(q.betaR - 1.0 / 36.0) <= 1e-10, num(q.betaR));
  c.check("alpha_value", std::abs(ab.alphaR - 0.6542) <= 1e-4, num(ab.alphaR));
  c.check("alpha<2/3", ab.alphaR < 2.0 / 3.0);
  const ggmt::L3Constants k = ggmt::l3_rational_constants();
  c.check("499/10584", k.frac1.text == "499/10584" && k.frac1_matches, k.frac1.text);
  c.check("1/8+29/17640", k.frac2_excess.text == "29/17640" && k.frac2.text == "1117/8820" && k.frac2_matches,
          k.frac2.text);
  return c;
}

Criterion c3() {
  Criterion c{3, "unstable spectra on the ladder"};
  const auto t0 = Clock::now();
  const spectra::ScanConfig cfg;  // n ∈ {200, 400, 800}, rmax ∈ {40, 80}, threshold 0.05
  for (int l = 0; l <= 6; ++l) {
    const spectra::ScanResult s = spectra::unstable_scan(l, cfg);
    const std::string tag = "l=" + std::to_string(l);
    if (l >= 2) {
      c.check(tag + " empty", s.accepted.empty(), std::to_string(s.accepted.size()) + " accepted");
      continue;
    }
    const double target = l == 0 ? -1.0 : -0.5;
    if (s.accepted.size() != 1) {
      c.check(tag + " single", false, std::to_string(s.accepted.size()) + " accepted");
      continue;
    }
    const spectra::EigenReport& e = s.accepted.front();
    c.check(tag + " eigenvalue", std::abs(e.lambda - std::complex<double>(target)) <= 5e-3, num(e.lambda.real()));
    if (!e.mode) {
      c.check(tag + " mode", false, "no eigenvector");
      continue;
    }
    const GridPtr g = e.mode->grid_ptr();
    const RadialFunction ref = l == 0 ? profile::sample_lambda_q(g) : profile::sample_dq(g);
    const double cs = spectra::cosine_similarity(*e.mode, ref);
    c.check(tag + " cosine", cs >= 0.999, num(cs));
  }
  const double secs = since(t0);
  c.check("runtime", secs <= 600.0, num(secs) + " s");
  return c;
}

Criterion c4() {
  Criterion c{4, "wave operator"};
  const GridPtr gf = make_grid(800, 40.0), gc = make_grid(400, 40.0);
  const waveop::WaveOpContext f = waveop::WaveOpContext::make(gf), co = waveop::WaveOpContext::make(gc);
  const RadialFunction dq = profile::sample_dq(gf);
  const double t = norm_r2(waveop::apply_T(f, dq)) / norm_r2(dq);
  c.check("T dQ", t <= 1e-5, num(t));

  const RadialFunction tr = waveop::apply_T(f, RadialFunction::sample(gf, [](double r) { return r; }));
  double printed = 0.0, algebraic = 0.0;
  for (int i = 0; i < gf->size(); ++i) {
    const double r = (*gf)[i], v = 4 * r * r * r / (5 * (r * r + 2));
    printed = std::max(printed, std::abs(tr[i] + v));
    algebraic = std::max(algebraic, std::abs(tr[i] - v));
  }
  c.known_failure("T[r] = -4r^3/(5(r^2+2))", printed <= 1e-8,
                  num(printed) + "; +4r^3/(5(r^2+2)) matches to " + num(algebraic));

  const std::function<double(double)> fns[] = {[](double r) { return r * std::exp(-r * r / 4); },
                                               [](double r) { return profile::q_deriv(r, 1); },
                                               [](double r) { return r / std::pow(1 + r * r, 3); }};
  const char* names[] = {"r e^{-r^2/4}", "dQ", "r/(1+r^2)^3"};
  for (int k = 0; k < 3; ++k) {
    const double rc = waveop::commutator_residual(co, RadialFunction::sample(gc, fns[k]));
    const double rf = waveop::commutator_residual(f, RadialFunction::sample(gf, fns[k]));
    const double p = observed_order(rc, rf);
    c.check(std::string("commutator order ") + names[k], p >= 1.8, num(p));
  }
  return c;
}

Criterion c5() {
  Criterion c{5, "Schrodinger bound"};
  const spectra::RitzCheck rc = spectra::schrodinger_spectrum_check(ops::assemble_tilde_L1_prime(make_grid(800, 40.0)));
  c.check("min Ritz", rc.min_ritz >= 0.39, num(rc.min_ritz));
  const waveop::PotentialMin pm = waveop::potential_min_tilde_L1_prime();
  c.check("potential min", std::abs(pm.value - 0.408) <= 0.002, num(pm.value));
  return c;
}

Criterion c6() {
  Criterion c{6, "coercivity property suite"};
  const GridPtr g = make_grid(800, 40.0);
  std::mt19937_64 rng(20240601);
  int form_bad = 0, ip_bad = 0, total = 0;
  for (int l = 3; l <= 6; ++l) {
    for (int k = 0; k < 50; ++k) {
      const RadialFunction f = RadialFunction::sample(g, random_function(l, rng));
      const ggmt::FormValue fv = ggmt::coercivity_form(f, l);
      if (!(fv.value >= fv.norm_sq / 8.0)) ++form_bad;
      if (!ggmt::interpolation_check(f, l, 4.0).pass) ++ip_bad;
      ++total;
    }
  }
  c.check("form bound", form_bad == 0, std::to_string(form_bad) + "/" + std::to_string(total) + " violations");
  c.check("interpolation", ip_bad == 0, std::to_string(ip_bad) + "/" + std::to_string(total) + " violations");
  return c;
}

Criterion c7() {
  Criterion c{7, "profile identities"};
  const double res = profile::profile_residual(*make_grid(800, 40.0));
  c.check("elliptic residual", res <= 1e-9, num(res));
  const double p0 = observed_order(eigen_residual(0, 400, -1.0), eigen_residual(0, 800, -1.0));
  const double p1 = observed_order(eigen_residual(1, 400, -0.5), eigen_residual(1, 800, -0.5));
  c.check("L_0 LambdaQ order", p0 >= 1.8, num(p0));
  c.check("L_1 dQ order", p1 >= 1.8, num(p1));
  return c;
}

Criterion c8() {
  Criterion c{8, "evolution"};
  const auto t0 = Clock::now();
  const GridPtr g = make_grid(400, 40.0);
  const double dt = 0.01;
  const double r0 = evolution::fit_growth_rate(evolution::linear_evolve(0, profile::sample_lambda_q(g), dt, 3.0), 0, 3);
  const double r1 = evolution::fit_growth_rate(evolution::linear_evolve(1, profile::sample_dq(g), dt, 3.0), 0, 3);
  c.check("rate l=0", std::abs(r0 - 1.0) <= 0.02, num(r0));
  c.check("rate l=1", std::abs(r1 - 0.5) <= 0.02, num(r1));

  const spectra::ProjectionPair proj = evolution::unstable_projection(0, g);
  const RadialFunction sb = proj.stable(RadialFunction::sample(g, [](double r) { return std::exp(-r * r); }));
  const double decay = -evolution::fit_growth_rate(evolution::linear_evolve(0, sb, dt, 6.0, &proj), 1.0, 6.0);
  c.check("stable decay", decay > 0.0, num(decay));

  const RadialFunction q = profile::sample_q(g);
  const evolution::EvolutionTrace steady = evolution::nonlinear_radial_evolve(q, dt, 5.0);
  double drift = 0.0;
  for (double x : steady.norms) drift = std::max(drift, x / norm_r2(q));
  const double h = 40.0 / 400;
  c.check("steady drift", drift <= 10.0 * (h * h + dt * dt), num(drift));

  evolution::ShootingOptions opt;
  opt.dt = 0.02;
  opt.horizon = 8.0;
  const RadialFunction unit = sb * (1.0 / norm_r2(sb));
  const double amps[2] = {1e-3, 2e-3};
  evolution::ShootingResult s[2];
  for (int k = 0; k < 2; ++k) s[k] = evolution::shoot_stable_manifold(unit * amps[k], -1e-3, 1e-3, opt);
  c.check("shooting converged", s[0].converged && s[1].converged);
  const double expo = std::log(std::abs(s[1].a_star / s[0].a_star)) / std::log(amps[1] / amps[0]);
  c.check("a* exponent", expo >= 1.5, num(expo));
  const double secs = since(t0);
  c.check("runtime", secs <= 600.0, num(secs) + " s");
  return c;
}

Criterion c9() {
  Criterion c{9, "cross-representation"};
  const GridPtr g = make_grid(800, 40.0);
  std::mt19937_64 rng(977);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  double worst = 0.0;
  for (int l = 1; l <= 4; ++l) {
    const Eigen::MatrixXd a = delta_l_inverse_matrix(g, l, InverseForm::kernel);
    const Eigen::MatrixXd b = delta_l_inverse_matrix(g, l, InverseForm::factorized);
    for (int t = 0; t < 10; ++t) {
      // random resolved vector: a sum of three Gaussians on the grid
      double ctr[3], wid[3], amp[3];
      for (int k = 0; k < 3; ++k) {
        ctr[k] = 10.0 * ud(rng);
        wid[k] = 1.0 + 2.0 * ud(rng);
        amp[k] = nd(rng);
      }
      Eigen::VectorXd v = Eigen::VectorXd::Zero(g->size());
      for (int i = 0; i < v.size(); ++i)
        for (int k = 0; k < 3; ++k) v[i] += amp[k] * std::exp(-std::pow(((*g)[i] - ctr[k]) / wid[k], 2));
      const Eigen::VectorXd av = a * v;
      worst = std::max(worst, (av - b * v).cwiseAbs().maxCoeff() / av.cwiseAbs().maxCoeff());
    }
  }
  c.check("kernel vs factorized", worst <= 1e-6, num(worst));

  const GridPtr ge = make_grid(400, 40.0);
  const double h = 40.0 / 400, pdt = 1e-3;
  const RadialFunction q = profile::sample_q(ge);
  const double mnorm = 4.0 * std::acos(-1.0) * PowerIntegrator(ge, 2.0).from_origin(q.values()).cwiseAbs().maxCoeff();
  const double defect = evolution::partial_mass_crosscheck(q, pdt);
  c.check("partial mass", defect <= 10.0 * (h * h + pdt * pdt) * mnorm, num(defect));
  return c;
}

}  // namespace

int main() {
  const std::function<Criterion()> runs[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9};
  int unexpected = 0;
  for (const auto& run : runs) {
    Criterion c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.check("exception", false, e.what());
    }
    bool pass = true, only_known = true;
    std::string failed;
    for (const Sub& s : c.subs) {
      if (s.pass) continue;
      pass = false;
      if (!s.known) only_known = false;
      failed += (failed.empty() ? "" : "; ") + s.name + (s.detail.empty() ? "" : " (" + s.detail + ")") +
                (s.known ? " [known]" : "");
    }
    if (!pass && !only_known) ++unexpected;
    std::printf("criterion %d: %s  %s%s%s\n", c.id, pass ? "PASS" : (only_known ? "FAIL (known)" : "FAIL"),
                c.title.c_str(), failed.empty() ? "" : "  failed: ", failed.c_str());
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
