#include "ksmode/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ksmode/profile.hpp"

namespace ksmode::spectra {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

cplx nearest(const std::vector<cplx>& vals, cplx z) {
  cplx best = vals.front();
  for (const cplx& v : vals)
    if (std::abs(v - z) < std::abs(best - z)) best = v;
  return best;
}

// Pad an interior vector with the Dirichlet zero.
Eigen::VectorXcd pad(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size() + 1);
  out.head(v.size()) = v;
  return out;
}

RadialFunction real_mode(const GridPtr& grid, Eigen::VectorXcd v) {
  int k = 0;
  v.cwiseAbs().maxCoeff(&k);
  v *= std::conj(v[k]) / std::abs(v[k]);
  RadialFunction f(grid, v.real());
  const double nrm = norm_r2(f);
  return f * (1.0 / nrm);
}

}  // namespace

std::vector<cplx> eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalues: QR iteration did not converge");
  std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  return out;
}

std::vector<EigenPair> eig_dense(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) throw PreconditionError("eig_dense: non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, true);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eig_dense: QR iteration did not converge (n = " << a.rows() << ", ‖A‖_F = " << a.norm() << ")";
    throw NumericalError(os.str());
  }
  const Eigen::MatrixXcd ac = a.cast<cplx>();
  const double anorm = a.norm();
  std::vector<EigenPair> out;
  out.reserve(a.rows());
  for (int j = 0; j < a.rows(); ++j) {
    EigenPair p{es.eigenvalues()[j], es.eigenvectors().col(j), 0.0};
    p.residual = (ac * p.vector - p.value * p.vector).norm() / p.vector.norm();
    if (p.residual > 1e-8 * std::max(anorm, 1.0)) {
      p.vector = inverse_iteration(ac, p.value);
      p.residual = (ac * p.vector - p.value * p.vector).norm() / p.vector.norm();
      if (p.residual > 1e-8 * std::max(anorm, 1.0)) {
        std::ostringstream os;
        os << "eig_dense: residual " << p.residual << " for eigenvalue " << p.value << " exceeds 1e-8‖A‖";
        throw NumericalError(os.str());
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<EigenPair> eig_dense(const OperatorMatrix& a) { return eig_dense(a.interior()); }

Eigen::VectorXcd inverse_iteration(const Eigen::MatrixXcd& a, cplx lambda, int iters) {
  const int n = static_cast<int>(a.rows());
  const double shift = 1e-10 * (1.0 + std::abs(lambda));
  Eigen::MatrixXcd m = a;
  m.diagonal().array() -= lambda + shift;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  Eigen::VectorXcd x(n);
  for (int i = 0; i < n; ++i) x[i] = cplx(1.0 + 0.5 * std::sin(1.3 * i), 0.25 * std::cos(0.7 * i));
  x.normalize();
  for (int k = 0; k < iters; ++k) {
    x = lu.solve(x);
    if (!x.allFinite()) throw NumericalError("inverse_iteration: solve produced non-finite values");
    x.normalize();
  }
  return x;
}

ExponentFit exponent_fits(const RadialFunction& v, cplx lambda, int l, double slack) {
  (void)l;
  const RadialGrid& g = v.grid();
  const double R = g.rmax();
  ExponentFit fit{kNaN, kNaN, false};
  fit.decay = loglog_slope(v, R / 10.0, 0.9 * R);
  const double r0 = g[0];
  double hi = std::min(10.0 * r0, 0.25);
  if (hi < g[2]) hi = g[2];
  fit.origin = loglog_slope(v, r0, hi);
  if (!std::isnan(fit.decay))
    fit.consistent = fit.decay <= -std::min(2.0, 2.0 * (1.0 - lambda.real())) + slack;
  return fit;
}

double cosine_similarity(const RadialFunction& a, const RadialFunction& b) {
  const double ab = weighted_inner(a, b);
  return std::abs(ab) / (norm_r2(a) * norm_r2(b));
}

ScanResult unstable_scan(int l, const ScanConfig& cfg) {
  if (l < 0) throw PreconditionError("unstable_scan: l must be >= 0");
  if (cfg.ns.size() < 3) throw PreconditionError("unstable_scan: ladder needs at least three grids");
  if (cfg.rmaxs.size() < 2) throw PreconditionError("unstable_scan: need at least two rmax values");
  for (std::size_t i = 1; i < cfg.ns.size(); ++i)
    if (cfg.ns[i] <= cfg.ns[i - 1]) throw PreconditionError("unstable_scan: ladder must increase");

  const double r0 = cfg.rmaxs[0];
  std::vector<std::vector<cplx>> ladder;
  for (int n : cfg.ns) ladder.push_back(eigenvalues(ops::assemble_Ll(l, make_grid(n, r0, cfg.stretch)).interior()));

  const std::size_t mid = cfg.ns.size() - 2;
  const double h_mid = r0 / cfg.ns[mid];
  std::vector<std::vector<cplx>> wide;
  for (std::size_t k = 1; k < cfg.rmaxs.size(); ++k) {
    const int n = static_cast<int>(std::lround(cfg.rmaxs[k] / h_mid));
    wide.push_back(eigenvalues(ops::assemble_Ll(l, make_grid(n, cfg.rmaxs[k], cfg.stretch)).interior()));
  }

  const GridPtr fine = make_grid(cfg.ns.back(), r0, cfg.stretch);
  const Eigen::MatrixXcd af = ops::assemble_Ll(l, fine).interior().cast<cplx>();

  ScanResult result;
  result.l = l;
  std::vector<cplx> cands;
  for (const cplx& z : ladder.back())
    if (z.real() < cfg.threshold) cands.push_back(z);
  std::sort(cands.begin(), cands.end(), [](cplx a, cplx b) { return a.real() < b.real(); });

  for (const cplx& z : cands) {
    EigenReport rep;
    rep.l = l;
    rep.lambda = z;
    rep.ladder.resize(cfg.ns.size());
    rep.ladder.back() = z;
    for (int k = static_cast<int>(cfg.ns.size()) - 2; k >= 0; --k)
      rep.ladder[k] = nearest(ladder[k], rep.ladder[k + 1]);
    const std::size_t m = rep.ladder.size();
    const double d_coarse = std::abs(rep.ladder[m - 3] - rep.ladder[m - 2]);
    const double d_fine = std::abs(rep.ladder[m - 2] - rep.ladder[m - 1]);
    const bool h_ok = d_coarse <= 10.0 * d_fine + cfg.abs_tol && d_fine <= cfg.abs_tol;
    bool r_ok = true;
    for (const auto& w : wide) {
      rep.rmax_partner = nearest(w, rep.ladder[mid]);
      r_ok = r_ok && std::abs(rep.rmax_partner - rep.ladder[mid]) <= cfg.abs_tol;
    }
    rep.converged = h_ok && r_ok;

    const Eigen::VectorXcd v = inverse_iteration(af, z);
    rep.residual = (af * v - z * v).norm() / v.norm();
    rep.mode = real_mode(fine, pad(v));
    const ExponentFit fit = exponent_fits(*rep.mode, z, l, cfg.consistency_slack);
    rep.decay_exponent = fit.decay;
    rep.origin_exponent = fit.origin;
    rep.consistent = fit.consistent;
    rep.accepted = rep.converged && !std::isnan(fit.decay) && !std::isnan(fit.origin) &&
                   fit.decay <= cfg.decay_max && std::abs(fit.origin - l) <= cfg.origin_slack &&
                   std::abs(z.imag()) <= cfg.abs_tol;
    result.candidates.push_back(rep);
    if (rep.accepted) result.accepted.push_back(rep);
  }
  return result;
}

Eigen::VectorXd ProjectionPair::coefficients(const RadialFunction& f) const {
  Eigen::VectorXd c(left_modes.size());
  for (std::size_t j = 0; j < left_modes.size(); ++j) c[j] = weighted_inner(f, left_modes[j]);
  return c;
}

RadialFunction ProjectionPair::unstable(const RadialFunction& f) const {
  const Eigen::VectorXd c = coefficients(f);
  RadialFunction out = RadialFunction::zero(f.grid_ptr());
  for (std::size_t j = 0; j < right_modes.size(); ++j) out = out + right_modes[j] * c[j];
  return out;
}

RadialFunction ProjectionPair::stable(const RadialFunction& f) const { return f - unstable(f); }

ProjectionPair build_projection(int l, const std::vector<EigenReport>& reports, const OperatorMatrix& a) {
  (void)l;
  if (reports.empty()) throw PreconditionError("build_projection: no reports");
  const GridPtr& grid = a.grid;
  const int m = a.size() - 1;
  const Eigen::MatrixXd ai = a.interior();
  const Eigen::MatrixXcd ac = ai.cast<cplx>();
  const Eigen::MatrixXcd at = ai.transpose().cast<cplx>();
  const Eigen::VectorXd w = grid->r2_weights().head(m);

  ProjectionPair pp;
  std::vector<Eigen::VectorXd> ys;
  for (const EigenReport& rep : reports) {
    if (std::abs(rep.lambda.imag()) > 1e-6)
      throw PreconditionError("build_projection: complex eigenvalues are not supported");
    // refine λ on this grid, then right and left vectors
    const std::vector<cplx> vals = eigenvalues(ai);
    const cplx lam = nearest(vals, rep.lambda);
    pp.right_modes.push_back(real_mode(grid, pad(inverse_iteration(ac, lam))));
    Eigen::VectorXcd y = inverse_iteration(at, lam);
    int k = 0;
    y.cwiseAbs().maxCoeff(&k);
    y *= std::conj(y[k]) / std::abs(y[k]);
    ys.push_back(y.real());
  }

  const int p = static_cast<int>(reports.size());
  // G_ij = ⟨φ_i, ψ_j⟩ with ψ_j = M^{-1} y_j, i.e. y_j^T φ_i
  Eigen::MatrixXd gm(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) gm(i, j) = ys[j].dot(pp.right_modes[i].values().head(m));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gm);
  if (svd.singularValues().minCoeff() < 1e-10 * std::max(1.0, svd.singularValues().maxCoeff()))
    throw NumericalError("build_projection: defective pairing between left and right modes");
  const Eigen::MatrixXd ginv_t = gm.inverse().transpose();
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < p; ++k) y += ys[k] * ginv_t(k, j);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(m + 1);
    psi.head(m) = y.cwiseQuotient(w);
    pp.left_modes.emplace_back(grid, psi);
  }
  double defect = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      defect = std::max(defect, std::abs(weighted_inner(pp.right_modes[i], pp.left_modes[j]) - (i == j ? 1.0 : 0.0)));
  pp.biorthogonality_defect = defect;
  return pp;
}

RitzCheck schrodinger_spectrum_check(const OperatorMatrix& a) {
  if (a.tag != OperatorTag::TildeL1Prime && a.tag != OperatorTag::HlAlphaW)
    throw PreconditionError("schrodinger_spectrum_check: operator is not in symmetric form");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.interior(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("schrodinger_spectrum_check: eigensolver failed");
  RitzCheck rc{es.eigenvalues().minCoeff(), a.potential.head(a.size() - 1).minCoeff()};
  return rc;
}

}  // namespace ksmode::spectra
