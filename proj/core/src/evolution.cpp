#include "ksmode/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ksmode/fd.hpp"
#include "ksmode/profile.hpp"

namespace ksmode::evolution {

namespace {

constexpr double kSolveDefect = 1e-10;
constexpr double kBoundaryRatio = 1e-6;

// r^{-2} ∂_r (r^2 ε D_2^{-1} ε) = r^{-2} ∂_r (r^3 G) = 3G + r G' with
// G = ε D_2^{-1}ε / r, which is even at the origin. Differencing the flux
// r^2 ε D_2^{-1}ε ~ r^3 directly leaves an O(1) error at the first node.
class FluxDivergence {
 public:
  explicit FluxDivergence(const GridPtr& grid)
      : r_(grid->r()), p2_(grid, 2.0), d1_(fd_operators(*grid, OriginClosure::even).d1) {}

  Eigen::VectorXd operator()(const Eigen::VectorXd& e) const {
    const Eigen::VectorXd cum = p2_.from_origin(e);  // r^2 D_2^{-1} ε
    const Eigen::VectorXd g = e.cwiseProduct(cum).cwiseQuotient(r_.cwiseProduct(r_).cwiseProduct(r_));
    return 3.0 * g + r_.cwiseProduct(d1_ * g);
  }

 private:
  Eigen::VectorXd r_;
  PowerIntegrator p2_;
  Eigen::SparseMatrix<double> d1_;
};

Eigen::VectorXd check_solve(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x = lu.solve(rhs);
  const double nb = rhs.norm();
  if (nb > 0.0 && (a * x - rhs).norm() > kSolveDefect * nb)
    throw NumericalError("implicit solve defect exceeds 1e-10");
  if (!x.allFinite()) throw NumericalError("implicit solve produced non-finite values");
  return x;
}

Eigen::VectorXd pad(const Eigen::VectorXd& interior) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(interior.size() + 1);
  v.head(interior.size()) = interior;
  return v;
}

void record(EvolutionTrace& tr, double t, const RadialFunction& eps, const spectra::ProjectionPair* proj) {
  tr.times.push_back(t);
  tr.norms.push_back(norm_r2(eps));
  if (proj != nullptr && !proj->left_modes.empty()) tr.mode_coeffs.push_back(proj->coefficients(eps));
}

double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() < 3) throw PreconditionError("fit: fewer than 3 samples in the window");
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace

spectra::ProjectionPair unstable_projection(int l, const GridPtr& grid, double threshold) {
  const OperatorMatrix op = ops::assemble_Ll(l, grid);
  std::vector<spectra::EigenReport> reports;
  for (const spectra::cplx& lam : spectra::eigenvalues(op.interior())) {
    if (lam.real() < threshold && std::abs(lam.imag()) < 1e-6) {
      spectra::EigenReport rep;
      rep.l = l;
      rep.lambda = {lam.real(), 0.0};
      reports.push_back(rep);
    }
  }
  if (reports.empty()) return {};
  return spectra::build_projection(l, reports, op);
}

EvolutionTrace linear_evolve(int l, const RadialFunction& eps0, double dt, double horizon,
                             const spectra::ProjectionPair* proj) {
  if (!(dt > 0.0 && dt <= 0.05)) throw PreconditionError("linear_evolve: dt must lie in (0, 0.05]");
  if (!(horizon > 0.0)) throw PreconditionError("linear_evolve: horizon must be positive");
  const GridPtr& grid = eps0.grid_ptr();
  const Eigen::MatrixXd k = ops::assemble_Ll(l, grid).interior();
  const int m = static_cast<int>(k.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd lhs = id + 0.5 * dt * k;
  const Eigen::MatrixXd rhs = id - 0.5 * dt * k;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);

  EvolutionTrace tr;
  tr.scheme = "crank-nicolson";
  tr.dt = dt;
  tr.l = l;
  Eigen::VectorXd x = eps0.values().head(m);
  record(tr, 0.0, RadialFunction(grid, pad(x)), proj);
  const int steps = static_cast<int>(std::lround(horizon / dt));
  for (int s = 1; s <= steps; ++s) {
    x = check_solve(lu, lhs, rhs * x);
    record(tr, s * dt, RadialFunction(grid, pad(x)), proj);
  }
  tr.final_state = RadialFunction(grid, pad(x));
  return tr;
}

double fit_growth_rate(const EvolutionTrace& trace, double t0, double t1) {
  std::vector<double> t, y;
  for (size_t i = 0; i < trace.times.size(); ++i) {
    if (trace.times[i] < t0 - 1e-12 || trace.times[i] > t1 + 1e-12) continue;
    if (!(trace.norms[i] > 0.0)) throw NumericalError("fit_growth_rate: zero norm in the window");
    t.push_back(trace.times[i]);
    y.push_back(std::log(trace.norms[i]));
  }
  return fit_slope(t, y);
}

double fit_coeff_rate(const EvolutionTrace& trace, int k, double t0, double t1) {
  if (trace.mode_coeffs.size() != trace.times.size())
    throw PreconditionError("fit_coeff_rate: trace has no mode coefficients");
  std::vector<double> t, y;
  for (size_t i = 0; i < trace.times.size(); ++i) {
    if (trace.times[i] < t0 - 1e-12 || trace.times[i] > t1 + 1e-12) continue;
    const double c = std::abs(trace.mode_coeffs[i][k]);
    if (!(c > 0.0)) throw NumericalError("fit_coeff_rate: zero coefficient in the window");
    t.push_back(trace.times[i]);
    y.push_back(std::log(c));
  }
  return fit_slope(t, y);
}

RadialFunction nonlinear_term(const RadialFunction& psi) {
  const FluxDivergence div(psi.grid_ptr());
  return {psi.grid_ptr(), div(psi.values())};
}

NonlinearStepper::NonlinearStepper(const GridPtr& grid, double dt) : grid_(grid), dt_(dt) {
  if (!(dt > 0.0 && dt <= 0.05)) throw PreconditionError("NonlinearStepper: dt must lie in (0, 0.05]");
  k_ = ops::assemble_Ll(0, grid).interior();
  const int m = static_cast<int>(k_.rows());
  lhs_ = Eigen::MatrixXd::Identity(m, m) + 0.5 * dt * k_;
  lu_.compute(lhs_);
  q_ = profile::sample_q(grid).values();
  // discrete residual -(-Δ + ½Λ) Q + N(Q) on the interior rows
  const OperatorMatrix k0 = ops::assemble_Ll(0, grid, {false, InverseForm::kernel});
  const FluxDivergence div(grid);
  forcing_ = (-(k0.entries * q_) + div(q_)).head(m);
}

Eigen::VectorXd NonlinearStepper::solve(const Eigen::VectorXd& rhs) const { return check_solve(lu_, lhs_, rhs); }

EvolutionTrace NonlinearStepper::run(const RadialFunction& psi0, double horizon,
                                     const NonlinearOptions& opt) const {
  if (psi0.grid_ptr() != grid_ &&
      (psi0.size() != grid_->size() || psi0.grid().r() != grid_->r()))
    throw PreconditionError("NonlinearStepper::run: psi0 is on a different grid");
  if (!(horizon > 0.0)) throw PreconditionError("nonlinear evolve: horizon must be positive");
  const int m = static_cast<int>(k_.rows());
  const FluxDivergence div(grid_);
  auto nl = [&](const Eigen::VectorXd& e) -> Eigen::VectorXd { return div(pad(e)).head(m); };

  // psi_form: the unknown is Ψ and the linear operator is the local part only
  Eigen::MatrixXd k_psi, lhs_psi;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_psi;
  if (opt.psi_form) {
    k_psi = ops::assemble_Ll(0, grid_, {false, InverseForm::kernel}).interior();
    lhs_psi = Eigen::MatrixXd::Identity(m, m) + 0.5 * dt_ * k_psi;
    lu_psi.compute(lhs_psi);
  }
  const Eigen::MatrixXd& k = opt.psi_form ? k_psi : k_;
  const Eigen::VectorXd shift = opt.psi_form ? Eigen::VectorXd(q_.head(m)) : Eigen::VectorXd::Zero(m);
  auto step_solve = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
    return opt.psi_form ? check_solve(lu_psi, lhs_psi, rhs) : solve(rhs);
  };
  const Eigen::VectorXd force =
      (opt.well_balanced || opt.psi_form) ? Eigen::VectorXd::Zero(m) : forcing_;

  EvolutionTrace tr;
  tr.scheme = opt.psi_form ? "imex-cn-ab2-psi"
                           : (opt.well_balanced ? "imex-cn-ab2-perturbation" : "imex-cn-ab2-direct");
  tr.dt = dt_;
  // u is ε, or Ψ in psi_form; ε = u - shift
  Eigen::VectorXd u = psi0.values().head(m) - q_.head(m) + shift;
  auto state = [&](const Eigen::VectorXd& x) { return RadialFunction(grid_, pad(x - shift)); };
  record(tr, 0.0, state(u), opt.proj);
  const double norm0 = tr.norms.front();

  auto explicit_part = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x - 0.5 * dt_ * (k * x); };
  Eigen::VectorXd n_prev = nl(u);
  const int steps = static_cast<int>(std::lround(horizon / dt_));
  for (int s = 1; s <= steps; ++s) {
    Eigen::VectorXd next;
    const Eigen::VectorXd base = explicit_part(u) + dt_ * force;
    const Eigen::VectorXd n_now = nl(u);
    if (s == 1) {
      const Eigen::VectorXd pred = step_solve(base + dt_ * n_now);
      next = step_solve(base + 0.5 * dt_ * (n_now + nl(pred)));
    } else {
      next = step_solve(base + dt_ * (1.5 * n_now - 0.5 * n_prev));
    }
    n_prev = n_now;

    const double psi_min = (q_.head(m) + next - shift).minCoeff();
    const double nrm = norm_r2(state(next));
    std::ostringstream why;
    if (!next.allFinite() || !std::isfinite(nrm)) {
      why << "non-finite state at tau = " << s * dt_;
    } else if (psi_min < opt.negativity_floor) {
      why << "negativity " << psi_min << " below " << opt.negativity_floor << " at tau = " << s * dt_;
    } else if (norm0 > 0.0 && nrm > opt.blowup_factor * norm0) {
      why << "norm blowup (" << nrm << ") at tau = " << s * dt_;
    }
    if (!why.str().empty()) {
      tr.final_state = state(u);
      throw EvolutionError("nonlinear_radial_evolve: " + why.str(), std::move(tr));
    }
    u = next;
    record(tr, s * dt_, state(u), opt.proj);
    const double psi_inf = (q_.head(m) + u - shift).cwiseAbs().maxCoeff();
    const double ratio = std::abs(u[m - 1] - shift[m - 1]) / psi_inf;
    tr.max_boundary_ratio = std::max(tr.max_boundary_ratio, ratio);
    if (opt.exit_radius > 0.0 && nrm > opt.exit_radius) break;
  }
  tr.boundary_flag = tr.max_boundary_ratio > kBoundaryRatio;
  tr.final_state = state(u);
  return tr;
}

EvolutionTrace nonlinear_radial_evolve(const RadialFunction& psi0, double dt, double horizon,
                                       const NonlinearOptions& opt) {
  const NonlinearStepper stepper(psi0.grid_ptr(), dt);
  return stepper.run(psi0, horizon, opt);
}

int departure_sign(const NonlinearStepper& stepper, const spectra::ProjectionPair& proj,
                   const RadialFunction& eps_s0, double a, double tube, double horizon) {
  const GridPtr& grid = stepper.grid();
  const RadialFunction lq = profile::sample_lambda_q(grid);
  const RadialFunction psi0 = profile::sample_q(grid) + eps_s0 + lq * (a / norm_r2(lq));
  NonlinearOptions opt;
  opt.exit_radius = tube;
  opt.proj = &proj;
  opt.negativity_floor = -std::numeric_limits<double>::infinity();
  const EvolutionTrace tr = stepper.run(psi0, horizon, opt);
  const double c = tr.mode_coeffs.back()[0];
  return c > 0 ? 1 : (c < 0 ? -1 : 0);
}

ShootingResult shoot_stable_manifold(const RadialFunction& eps_s0, double a_lo, double a_hi,
                                     const ShootingOptions& opt) {
  if (!(a_lo < a_hi)) throw PreconditionError("shoot: bracket must satisfy a_lo < a_hi");
  const GridPtr& grid = eps_s0.grid_ptr();
  const NonlinearStepper stepper(grid, opt.dt);
  const spectra::ProjectionPair proj = unstable_projection(0, grid);
  if (proj.left_modes.size() != 1)
    throw NumericalError("shoot: expected exactly one discrete unstable mode for l = 0");
  // the ΛQ coefficient must carry the sign of the ΛQ direction
  const double orient = proj.coefficients(profile::sample_lambda_q(grid))[0] > 0 ? 1.0 : -1.0;
  const double tube = opt.tube_factor * std::max({norm_r2(eps_s0), std::abs(a_lo), std::abs(a_hi)});

  ShootingResult res;
  res.initial_width = a_hi - a_lo;
  auto sign_at = [&](double a) {
    ++res.evaluations;
    return static_cast<int>(orient) * departure_sign(stepper, proj, eps_s0, a, tube, opt.horizon);
  };
  int s_lo = sign_at(a_lo), s_hi = sign_at(a_hi);
  res.departure_sign_low = s_lo;
  res.departure_sign_high = s_hi;
  if (s_lo == 0 || s_hi == 0 || s_lo == s_hi)
    throw PreconditionError("shoot: departure signs at the bracket ends do not differ (bracket invalid)");
  double lo = a_lo, hi = a_hi;
  while (hi - lo > opt.rel_tol * res.initial_width) {
    const double mid = 0.5 * (lo + hi);
    const int s = sign_at(mid);
    if (s == 0) {
      lo = hi = mid;
      break;
    }
    (s == s_lo ? lo : hi) = mid;
  }
  res.a_star = 0.5 * (lo + hi);
  res.bracket_width = hi - lo;
  res.converged = res.bracket_width <= opt.rel_tol * res.initial_width;
  return res;
}

double partial_mass_crosscheck(const RadialFunction& psi, double dt) {
  const GridPtr& grid = psi.grid_ptr();
  const RadialGrid& g = *grid;
  const int n = g.size();
  const double four_pi = 4.0 * std::numbers::pi;
  const PowerIntegrator p2(grid, 2.0);
  const Eigen::VectorXd m0 = four_pi * p2.from_origin(psi.values());
  const FdOperators fd = fd_operators(g, OriginClosure::vanish);
  const Eigen::VectorXd& r = g.r();
  auto rhs = [&](const Eigen::VectorXd& m) -> Eigen::VectorXd {
    const Eigen::VectorXd d1 = fd.d1 * m;
    const Eigen::VectorXd d2 = fd.d2 * m;
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i)
      out[i] = d2[i] - 2.0 / r[i] * d1[i] - 0.5 * r[i] * d1[i] + 0.5 * m[i] +
               m[i] * d1[i] / (four_pi * r[i] * r[i]);
    out[n - 1] = 0.0;
    return out;
  };
  const Eigen::VectorXd k1 = rhs(m0);
  const Eigen::VectorXd m1 = m0 + 0.5 * dt * (k1 + rhs(m0 + dt * k1));

  NonlinearOptions opt;
  opt.psi_form = true;
  opt.negativity_floor = -std::numeric_limits<double>::infinity();
  const EvolutionTrace tr = nonlinear_radial_evolve(psi, dt, dt, opt);
  const RadialFunction psi1 = profile::sample_q(grid) + *tr.final_state;
  const Eigen::VectorXd mpsi = four_pi * p2.from_origin(psi1.values());
  double defect = 0.0;
  for (int i = 0; i < n && r[i] <= 0.5 * g.rmax(); ++i) defect = std::max(defect, std::abs(m1[i] - mpsi[i]));
  return defect;
}

}  // namespace ksmode::evolution
