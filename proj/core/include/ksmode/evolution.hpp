#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "ksmode/error.hpp"
#include "ksmode/operators.hpp"
#include "ksmode/radial.hpp"
#include "ksmode/spectra.hpp"

namespace ksmode::evolution {

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> norms;                     // ‖ε‖ in L^2(r^2 dr)
  std::vector<Eigen::VectorXd> mode_coeffs;      // against the left modes, if any
  std::string scheme;
  double dt = 0.0;
  int l = 0;
  double max_boundary_ratio = 0.0;  // max |ε(r_{n-2})| / ‖Ψ‖_∞
  bool boundary_flag = false;       // ratio exceeded 1e-6
  std::optional<RadialFunction> final_state;
};

// Carries the last accepted trace when a run is rejected.
class EvolutionError : public NumericalError {
 public:
  EvolutionError(const std::string& what, EvolutionTrace last)
      : NumericalError(what), trace(std::move(last)) {}
  EvolutionTrace trace;
};

// Projection onto the discrete unstable modes of ℒ_l on this grid: every
// eigenvalue of the interior matrix with Re λ < threshold.
spectra::ProjectionPair unstable_projection(int l, const GridPtr& grid, double threshold = -0.05);

// Crank-Nicolson for ∂_τ ε = -ℒ_l ε with the assembled matrix.
EvolutionTrace linear_evolve(int l, const RadialFunction& eps0, double dt, double horizon,
                             const spectra::ProjectionPair* proj = nullptr);

// Least-squares slope of log ‖ε‖ over times in [t0, t1].
double fit_growth_rate(const EvolutionTrace& trace, double t0, double t1);
// Same fit applied to |coefficient k|.
double fit_coeff_rate(const EvolutionTrace& trace, int k, double t0, double t1);

// N(ε) = r^{-2} ∂_r (r^2 ε D_2^{-1} ε)
RadialFunction nonlinear_term(const RadialFunction& psi);

struct NonlinearOptions {
  // true: evolve ε = Ψ - Q so Q is an exact discrete steady state.
  // false: add the discrete residual of Q as a forcing, equivalent to stepping Ψ.
  bool well_balanced = true;
  // true: step Ψ itself, Crank-Nicolson on the local part and N(Ψ) explicit;
  // Ψ = 0 is then an exact fixed point. Overrides well_balanced.
  bool psi_form = false;
  double negativity_floor = -1e-8;
  double blowup_factor = 1e6;
  // stop once ‖ε‖ exceeds this (0 disables)
  double exit_radius = 0.0;
  const spectra::ProjectionPair* proj = nullptr;
};

// IMEX: Crank-Nicolson on ℒ_0, AB2 on N(ε) with a Heun first step.
class NonlinearStepper {
 public:
  NonlinearStepper(const GridPtr& grid, double dt);
  const GridPtr& grid() const { return grid_; }
  double dt() const { return dt_; }
  EvolutionTrace run(const RadialFunction& psi0, double horizon, const NonlinearOptions& opt = {}) const;

 private:
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  GridPtr grid_;
  double dt_;
  Eigen::MatrixXd k_;                    // interior ℒ_0
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd lhs_;                  // I + dt/2 K, for the defect check
  Eigen::VectorXd q_;                    // nodal Q
  Eigen::VectorXd forcing_;              // discrete residual of Q (interior)
};

EvolutionTrace nonlinear_radial_evolve(const RadialFunction& psi0, double dt, double horizon,
                                       const NonlinearOptions& opt = {});

struct ShootingResult {
  double a_star = 0.0;
  double bracket_width = 0.0;
  double initial_width = 0.0;
  bool converged = false;
  int departure_sign_low = 0;
  int departure_sign_high = 0;
  int evaluations = 0;
};

struct ShootingOptions {
  double tube_factor = 10.0;
  double horizon = 8.0;
  double rel_tol = 1e-8;
  double dt = 0.02;
};

// Bisection over a in Ψ_0 = Q + ε_s0 + a ΛQ/‖ΛQ‖. The departure sign is the
// sign of the unstable coefficient when ‖Ψ - Q‖ leaves the tube, or at the
// horizon if it never does.
ShootingResult shoot_stable_manifold(const RadialFunction& eps_s0, double a_lo, double a_hi,
                                     const ShootingOptions& opt = {});
// Departure sign for one amplitude (exposed for checks of the bisection signs).
int departure_sign(const NonlinearStepper& stepper, const spectra::ProjectionPair& proj,
                   const RadialFunction& eps_s0, double a, double tube, double horizon);

// m(r) = 4π ∫_0^r ψ s^2 ds advanced one Heun step of
// m_τ = m'' - (2/r) m' - (r/2) m' + m/2 + m m'/(4π r^2), compared on r <= rmax/2
// against the partial mass of one nonlinear step of Ψ. Returns the max defect.
double partial_mass_crosscheck(const RadialFunction& psi, double dt);

}  // namespace ksmode::evolution
