#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ksmode/operators.hpp"

namespace ksmode::spectra {

using cplx = std::complex<double>;

struct EigenPair {
  cplx value;
  Eigen::VectorXcd vector;
  double residual;  // ‖Av - λv‖ / ‖v‖
};

// Full eigendecomposition. Throws NumericalError if the QR iteration fails or
// a pair has residual above 1e-8 ‖A‖.
std::vector<EigenPair> eig_dense(const Eigen::MatrixXd& a);
std::vector<EigenPair> eig_dense(const OperatorMatrix& a);
// Eigenvalues only (used along the refinement ladder).
std::vector<cplx> eigenvalues(const Eigen::MatrixXd& a);

// Eigenvector for a known eigenvalue by shifted inverse iteration.
Eigen::VectorXcd inverse_iteration(const Eigen::MatrixXcd& a, cplx lambda, int iters = 4);

struct ExponentFit {
  double decay;   // NaN when unreliable
  double origin;  // NaN when unreliable
  bool consistent;
};

// Log-log fits of |v| on [rmax/10, 0.9 rmax] and on the first decade of the
// grid (capped at r = 0.25). consistent = decay <= -min(2, 2(1 - Re λ)) + slack.
ExponentFit exponent_fits(const RadialFunction& v, cplx lambda, int l, double slack = 0.5);

struct EigenReport {
  int l = 0;
  cplx lambda;
  double residual = 0.0;
  bool converged = false;
  double decay_exponent = 0.0;
  double origin_exponent = 0.0;
  bool consistent = false;
  bool accepted = false;
  std::vector<cplx> ladder;  // matched eigenvalue on each ladder grid, coarse to fine
  cplx rmax_partner;         // matched eigenvalue on the enlarged domain
  std::optional<RadialFunction> mode;  // real, r^2-normalized, finest grid
};

struct ScanConfig {
  std::vector<int> ns{200, 400, 800};
  std::vector<double> rmaxs{40.0, 80.0};
  double threshold = 0.05;
  double abs_tol = 5e-3;
  double decay_max = -1.5;
  double origin_slack = 0.3;
  double consistency_slack = 0.5;
  Stretch stretch = Stretch::uniform();
};

struct ScanResult {
  int l = 0;
  std::vector<EigenReport> candidates;  // every eigenvalue below threshold on the finest grid
  std::vector<EigenReport> accepted;
};

// Ladder n doubles at rmaxs[0]; each further rmax is run at the h of the
// middle ladder grid and compared against it.
ScanResult unstable_scan(int l, const ScanConfig& cfg = {});

class ProjectionPair {
 public:
  std::vector<RadialFunction> right_modes;
  std::vector<RadialFunction> left_modes;
  double biorthogonality_defect = 0.0;

  // (f, ψ_j) in L^2(r^2 dr)
  Eigen::VectorXd coefficients(const RadialFunction& f) const;
  RadialFunction unstable(const RadialFunction& f) const;
  RadialFunction stable(const RadialFunction& f) const;
};

// Right eigenvectors of A and left eigenvectors under the r^2-weighted
// pairing, bi-orthonormalized. Reports supply the eigenvalues.
ProjectionPair build_projection(int l, const std::vector<EigenReport>& reports, const OperatorMatrix& a);

struct RitzCheck {
  double min_ritz;
  double min_potential;  // smallest nodal potential value
};
RitzCheck schrodinger_spectrum_check(const OperatorMatrix& a);

// r^2-weighted |cos| between two functions on the same grid.
double cosine_similarity(const RadialFunction& a, const RadialFunction& b);

}  // namespace ksmode::spectra
