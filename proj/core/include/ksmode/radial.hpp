#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

#include "ksmode/error.hpp"

namespace ksmode {

struct Stretch {
  enum class Kind { uniform, geometric };
  Kind kind = Kind::uniform;
  double ratio = 1.0;

  static Stretch uniform() { return {}; }
  static Stretch geometric(double ratio) { return {Kind::geometric, ratio}; }
};

// Nodes r_0 < ... < r_{n-1} = rmax with r_0 > 0. Quadrature weights are the
// composite trapezoid rule on [r_0, rmax]; integrals from the origin add the
// panel [0, r_0] through origin_weight().
class RadialGrid {
 public:
  RadialGrid(Eigen::VectorXd nodes, Stretch stretch);

  int size() const { return static_cast<int>(r_.size()); }
  double rmax() const { return r_[r_.size() - 1]; }
  double operator[](int i) const { return r_[i]; }
  const Eigen::VectorXd& r() const { return r_; }
  const Eigen::VectorXd& weights() const { return w_; }
  double origin_weight() const { return 0.5 * r_[0]; }
  const Stretch& stretch() const { return stretch_; }
  bool is_uniform() const { return stretch_.kind == Stretch::Kind::uniform; }

  // Weights for ∫_0^rmax F r^2 dr with F regular at the origin.
  Eigen::VectorXd r2_weights() const;

 private:
  Eigen::VectorXd r_;
  Eigen::VectorXd w_;
  Stretch stretch_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int n, double rmax, Stretch stretch = Stretch::uniform());

class RadialFunction {
 public:
  RadialFunction(GridPtr grid, Eigen::VectorXd values);

  static RadialFunction sample(GridPtr grid, const std::function<double(double)>& f);
  static RadialFunction zero(GridPtr grid);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const { return v_; }
  int size() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[i]; }

  RadialFunction operator+(const RadialFunction& o) const;
  RadialFunction operator-(const RadialFunction& o) const;
  RadialFunction operator*(double s) const;
  // pointwise product
  RadialFunction operator*(const RadialFunction& o) const;

 private:
  GridPtr grid_;
  Eigen::VectorXd v_;
};

inline RadialFunction operator*(double s, const RadialFunction& f) { return f * s; }

void require_same_grid(const RadialFunction& a, const RadialFunction& b);

// Finite-difference weights (Fornberg) for derivatives 0..m at x0 from xs.
Eigen::MatrixXd fd_weights(double x0, const std::vector<double>& xs, int m);

// ∫ u(s) s^q ds by product integration: u is interpolated by local cubics
// through four nodes and each panel is integrated exactly against s^q
// (Gauss-Legendre, exact for integer q <= 16). Panel 0 is [0, r_0] and
// extrapolates from the first four nodes.
class PowerIntegrator {
 public:
  PowerIntegrator(GridPtr grid, double q);

  // (from_origin u)_i = ∫_0^{r_i} u s^q ds (requires q > -1)
  Eigen::VectorXd from_origin(const Eigen::VectorXd& u) const;
  // (to_outer u)_i = ∫_{r_i}^{rmax} u s^q ds
  Eigen::VectorXd to_outer(const Eigen::VectorXd& u) const;
  Eigen::MatrixXd from_origin_matrix() const;
  Eigen::MatrixXd to_outer_matrix() const;

 private:
  struct Panel {
    int first;
    double w[4];
  };
  GridPtr grid_;
  double q_;
  std::vector<Panel> panels_;  // panels_[p] covers [r_{p-1}, r_p], r_{-1} = 0
};

// ∫_{rmax}^∞ f s^q ds assuming f ~ c s^{-p} on [rmax/2, rmax].
// Returns 0 when f(rmax) is negligible; throws NumericalError on a tail that
// is not power-like or does not converge.
double power_tail(const RadialFunction& f, double q);

// D_k f = ∂_r f + (k/r) f
RadialFunction dk_apply(int k, const RadialFunction& f);
// D_k^{-1}: r^{-k}∫_0^r f s^k (k > 0), -r^{-k}∫_r^∞ f s^k (k <= 0)
RadialFunction dk_inverse(double k, const RadialFunction& f);
RadialFunction derivative(const RadialFunction& f);

// f'' + (2/r) f' - l(l+1) f / r^2, origin closure f ~ r^l.
RadialFunction delta_l_apply(int l, const RadialFunction& f);

enum class InverseForm { kernel, factorized };

// Δ_l^{-1} with tails. kernel: -(1/(2l+1)) ∫ r_<^l / r_>^{l+1} f s^2 ds.
// factorized: D_{-l}^{-1} D_{l+2}^{-1}.
RadialFunction delta_l_inverse(int l, const RadialFunction& f,
                               InverseForm form = InverseForm::kernel);
// ∂_r Δ_l^{-1}. kernel: ((l+1) D_{l+2}^{-1} + l D_{-(l-1)}^{-1}) / (2l+1).
// factorized: D_{l+2}^{-1} + (l/r) D_{-l}^{-1} D_{l+2}^{-1}.
RadialFunction deriv_deltal_inverse(int l, const RadialFunction& f,
                                    InverseForm form = InverseForm::kernel);

// Dense matrices on the grid (no tail beyond rmax).
Eigen::MatrixXd dk_inverse_matrix(const GridPtr& grid, double k);
Eigen::MatrixXd delta_l_inverse_matrix(const GridPtr& grid, int l, InverseForm form);
Eigen::MatrixXd deriv_deltal_inverse_matrix(const GridPtr& grid, int l, InverseForm form);

struct Weight {
  enum class Kind { flat, r2, r2_custom };
  Kind kind = Kind::r2;
  std::function<double(double)> omega;

  static Weight flat() { return {Kind::flat, {}}; }
  static Weight r2() { return {Kind::r2, {}}; }
  static Weight r2_times(std::function<double(double)> w) { return {Kind::r2_custom, std::move(w)}; }
};

// ∫ f g ω dr. flat integrates over [r_0, rmax]; r2 kinds include [0, r_0].
double weighted_inner(const RadialFunction& f, const RadialFunction& g,
                      const Weight& weight = Weight::r2());
double norm_r2(const RadialFunction& f);

// Nodal weights used by weighted_inner.
Eigen::VectorXd inner_weights(const RadialGrid& grid, const Weight& weight);

// Least-squares slope of log|f| against log r over nodes in [r_lo, r_hi].
// Returns NaN when fewer than 3 usable nodes exist.
double loglog_slope(const RadialFunction& f, double r_lo, double r_hi);

// Richardson extrapolation of a quantity of known order p under grid halving.
inline double richardson(double coarse, double fine, double order) {
  const double f = std::pow(2.0, order);
  return (f * fine - coarse) / (f - 1.0);
}

// Observed convergence order from errors on grids h and h/2.
inline double observed_order(double err_coarse, double err_fine) {
  return std::log2(err_coarse / err_fine);
}

}  // namespace ksmode
