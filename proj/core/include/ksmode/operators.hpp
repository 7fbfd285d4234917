#pragma once

#include <Eigen/Dense>

#include "ksmode/radial.hpp"
#include "ksmode/weight.hpp"

namespace ksmode {

enum class OperatorTag { Ll, TildeLlAlpha, TildeL1, TildeL1Prime, HlAlphaW };

const char* tag_name(OperatorTag tag);

struct BoundaryClosure {
  double origin_exponent = 0.0;
  bool outer_dirichlet = true;
};

// Dense n×n discretization. The last row is the outer Dirichlet closure
// (identity row); interior() is the (n-1)×(n-1) block acting on unknowns.
// Schrödinger tags store the symmetrized matrix S = M^{1/2} K M^{-1/2}; the
// nodal action is K = diag(1/s) S diag(s) with s = similarity.
struct OperatorMatrix {
  GridPtr grid;
  int l = 0;
  OperatorTag tag = OperatorTag::Ll;
  Eigen::MatrixXd entries;
  BoundaryClosure bc;
  Eigen::VectorXd similarity;  // empty for non-symmetrized tags
  Eigen::VectorXd potential;   // nodal potential of Schrödinger tags

  int size() const { return static_cast<int>(entries.rows()); }
  Eigen::MatrixXd interior() const;
  // Nodal action on a full-length vector (Dirichlet row included).
  Eigen::VectorXd apply_nodal(const Eigen::VectorXd& v) const;
  RadialFunction apply(const RadialFunction& f) const;
};

namespace ops {

struct LlOptions {
  bool include_profile = true;  // false: -Δ_l + ½Λ only
  InverseForm form = InverseForm::kernel;
};

// -Δ_l + ½Λ - 2Q - D_2^{-1}Q ∂_r - Q' ∂_rΔ_l^{-1}
OperatorMatrix assemble_Ll(int l, const GridPtr& grid, const LlOptions& opt = {});
// Function-level ℒ_l with analytic tails in the nonlocal term.
RadialFunction apply_Ll(int l, const RadialFunction& f, const LlOptions& opt = {});

// r^α D_{l+2}^{-1} ℒ_l D_{l+2} r^{-α}; requires α ∈ [-l, l + ½).
OperatorMatrix assemble_tilde_Ll_alpha(int l, double alpha, const GridPtr& grid);
// D_{l+2-α}^{-1} V_1 + D_{l+2-α}^{-1} V_2 D_{-l-α}^{-1} (the conjugated T_l).
Eigen::MatrixXd tilde_nonlocal_matrix(int l, double alpha, const GridPtr& grid);
// Explicit L² operator-norm bound of the conjugated T_l from pointwise
// Cauchy-Schwarz estimates.
double tilde_nonlocal_bound(int l, double alpha);

// -∂^2 + A ∂ + B with A, B in closed form.
OperatorMatrix assemble_tilde_L1(const GridPtr& grid, bool include_profile = true);
// Symmetric -∂^2 + 12/r^2 + r^2/16 - 8/(2+r^2) - 3/4.
OperatorMatrix assemble_tilde_L1_prime(const GridPtr& grid);
double tilde_L1_prime_potential(double r);

// L_{l,α} = -(α-1)^2 + (l+1)(l+2)
double big_l(int l, double alpha);
// ½ D_{2α-4} D_2^{-1}Q in closed form.
double half_d_d2inv_q(double r, double alpha);
double h_potential(int l, double alpha, const WeightW& w, double mu, double r);
OperatorMatrix assemble_H_l_alpha_W(int l, double alpha, double theta, const WeightW& w,
                                    double mu, const GridPtr& grid);

}  // namespace ops
}  // namespace ksmode
