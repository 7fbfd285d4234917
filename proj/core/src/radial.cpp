#include "ksmode/radial.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "ksmode/fd.hpp"

namespace ksmode {

namespace {

// 10-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 10> kGlX = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472,
    -0.1488743389816312, 0.1488743389816312,  0.4333953941292472,  0.6794095682990244,
    0.8650633666889845,  0.9739065285171717};
constexpr std::array<double, 10> kGlW = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963,
    0.2955242247147529, 0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
    0.1494513491505806, 0.0666713443086881};

double lagrange(const double* xs, int k, double s) {
  double v = 1.0;
  for (int j = 0; j < 4; ++j)
    if (j != k) v *= (s - xs[j]) / (xs[k] - xs[j]);
  return v;
}

bool is_integer(double q) { return std::abs(q - std::round(q)) < 1e-12; }

}  // namespace

RadialGrid::RadialGrid(Eigen::VectorXd nodes, Stretch stretch)
    : r_(std::move(nodes)), stretch_(stretch) {
  const int n = size();
  if (n < 2) throw PreconditionError("grid needs at least two nodes");
  if (!(r_[0] > 0.0)) throw PreconditionError("first node must be positive");
  for (int i = 1; i < n; ++i)
    if (!(r_[i] > r_[i - 1])) throw PreconditionError("grid nodes must increase strictly");
  w_ = Eigen::VectorXd::Zero(n);
  for (int i = 0; i + 1 < n; ++i) {
    const double h = r_[i + 1] - r_[i];
    w_[i] += 0.5 * h;
    w_[i + 1] += 0.5 * h;
  }
}

Eigen::VectorXd RadialGrid::r2_weights() const {
  Eigen::VectorXd w = w_;
  w[0] += origin_weight();
  return w.cwiseProduct(r_.cwiseProduct(r_));
}

GridPtr make_grid(int n, double rmax, Stretch stretch) {
  if (n < 16) throw PreconditionError("make_grid: n must be >= 16, got " + std::to_string(n));
  if (!(rmax > 0.0) || !std::isfinite(rmax)) throw PreconditionError("make_grid: rmax must be positive");
  Eigen::VectorXd r(n);
  if (stretch.kind == Stretch::Kind::geometric) {
    const double q = stretch.ratio;
    if (!(q > 0.0) || !std::isfinite(q)) throw PreconditionError("make_grid: geometric ratio must be > 0");
    if (std::abs(q - 1.0) < 1e-14) {
      stretch = Stretch::uniform();
    } else {
      const double h1 = rmax * (q - 1.0) / (std::pow(q, n) - 1.0);
      double acc = 0.0, h = h1;
      for (int i = 0; i < n; ++i) {
        acc += h;
        r[i] = acc;
        h *= q;
      }
      r[n - 1] = rmax;
      return std::make_shared<const RadialGrid>(std::move(r), stretch);
    }
  }
  const double h = rmax / n;
  for (int i = 0; i < n; ++i) r[i] = (i + 1) * h;
  r[n - 1] = rmax;
  return std::make_shared<const RadialGrid>(std::move(r), stretch);
}

RadialFunction::RadialFunction(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), v_(std::move(values)) {
  if (!grid_) throw PreconditionError("RadialFunction: null grid");
  if (v_.size() != grid_->size())
    throw PreconditionError("RadialFunction: value count does not match grid");
  if (!v_.allFinite()) throw NumericalError("RadialFunction: non-finite values");
}

RadialFunction RadialFunction::sample(GridPtr grid, const std::function<double(double)>& f) {
  Eigen::VectorXd v(grid->size());
  for (int i = 0; i < grid->size(); ++i) v[i] = f((*grid)[i]);
  return {std::move(grid), std::move(v)};
}

RadialFunction RadialFunction::zero(GridPtr grid) {
  const int n = grid->size();
  return {std::move(grid), Eigen::VectorXd::Zero(n)};
}

void require_same_grid(const RadialFunction& a, const RadialFunction& b) {
  if (a.grid_ptr() != b.grid_ptr() &&
      (a.size() != b.size() || a.grid().r() != b.grid().r()))
    throw PreconditionError("radial functions live on different grids");
}

RadialFunction RadialFunction::operator+(const RadialFunction& o) const {
  require_same_grid(*this, o);
  return {grid_, v_ + o.v_};
}
RadialFunction RadialFunction::operator-(const RadialFunction& o) const {
  require_same_grid(*this, o);
  return {grid_, v_ - o.v_};
}
RadialFunction RadialFunction::operator*(double s) const { return {grid_, v_ * s}; }
RadialFunction RadialFunction::operator*(const RadialFunction& o) const {
  require_same_grid(*this, o);
  return {grid_, v_.cwiseProduct(o.v_)};
}

Eigen::MatrixXd fd_weights(double x0, const std::vector<double>& xs, int m) {
  // Fornberg's recursion; column d holds weights for the d-th derivative.
  const int n = static_cast<int>(xs.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m + 1);
  double c1 = 1.0, c4 = xs[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c;
}

PowerIntegrator::PowerIntegrator(GridPtr grid, double q) : grid_(std::move(grid)), q_(q) {
  const auto& r = grid_->r();
  const int n = grid_->size();
  if (n < 4) throw PreconditionError("PowerIntegrator needs at least four nodes");
  panels_.resize(n);
  const bool graded = !is_integer(q);
  for (int p = 0; p < n; ++p) {
    Panel pan{};
    pan.first = std::clamp(p - 2, 0, n - 4);
    const double xs[4] = {r[pan.first], r[pan.first + 1], r[pan.first + 2], r[pan.first + 3]};
    const double a = p == 0 ? 0.0 : r[p - 1];
    const double b = r[p];
    for (int k = 0; k < 4; ++k) pan.w[k] = 0.0;
    for (std::size_t g = 0; g < kGlX.size(); ++g) {
      double s, wt;
      if (p == 0 && graded) {
        // s = b t^2 removes the fractional-power endpoint singularity
        const double t = 0.5 * (kGlX[g] + 1.0);
        s = b * t * t;
        wt = 0.5 * kGlW[g] * 2.0 * b * t;
      } else {
        s = 0.5 * (a + b) + 0.5 * (b - a) * kGlX[g];
        wt = 0.5 * (b - a) * kGlW[g];
      }
      const double sq = std::pow(s, q);
      for (int k = 0; k < 4; ++k) pan.w[k] += wt * sq * lagrange(xs, k, s);
    }
    panels_[p] = pan;
  }
}

Eigen::VectorXd PowerIntegrator::from_origin(const Eigen::VectorXd& u) const {
  if (!(q_ > -1.0)) throw PreconditionError("from_origin requires q > -1");
  const int n = grid_->size();
  Eigen::VectorXd out(n);
  double acc = 0.0;
  for (int p = 0; p < n; ++p) {
    const Panel& pan = panels_[p];
    for (int k = 0; k < 4; ++k) acc += pan.w[k] * u[pan.first + k];
    out[p] = acc;
  }
  return out;
}

Eigen::VectorXd PowerIntegrator::to_outer(const Eigen::VectorXd& u) const {
  const int n = grid_->size();
  Eigen::VectorXd out(n);
  double acc = 0.0;
  out[n - 1] = 0.0;
  for (int p = n - 1; p >= 1; --p) {
    const Panel& pan = panels_[p];
    for (int k = 0; k < 4; ++k) acc += pan.w[k] * u[pan.first + k];
    out[p - 1] = acc;
  }
  return out;
}

Eigen::MatrixXd PowerIntegrator::from_origin_matrix() const {
  if (!(q_ > -1.0)) throw PreconditionError("from_origin requires q > -1");
  const int n = grid_->size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
  for (int p = 0; p < n; ++p) {
    const Panel& pan = panels_[p];
    for (int k = 0; k < 4; ++k) acc[pan.first + k] += pan.w[k];
    m.row(p) = acc;
  }
  return m;
}

Eigen::MatrixXd PowerIntegrator::to_outer_matrix() const {
  const int n = grid_->size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(n);
  for (int p = n - 1; p >= 1; --p) {
    const Panel& pan = panels_[p];
    for (int k = 0; k < 4; ++k) acc[pan.first + k] += pan.w[k];
    m.row(p - 1) = acc;
  }
  return m;
}

double power_tail(const RadialFunction& f, double q) {
  const auto& r = f.grid().r();
  const int n = f.size();
  const double R = r[n - 1];
  const double fR = f[n - 1];
  const double maxabs = f.values().cwiseAbs().maxCoeff();
  if (maxabs == 0.0 || std::abs(fR) <= 1e-14 * maxabs) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (r[i] < R / 2.0) continue;
    if (f[i] == 0.0 || (f[i] > 0) != (fR > 0))
      throw NumericalError("power_tail: integrand changes sign on [rmax/2, rmax]");
    const double x = std::log(r[i]), y = std::log(std::abs(f[i]));
    sx += x; sy += y; sxx += x * x; sxy += x * y; ++m;
  }
  if (m < 3) throw NumericalError("power_tail: too few nodes on [rmax/2, rmax]");
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double p = -slope;
  if (q - p >= -1.0)
    throw NumericalError("power_tail: divergent tail (fitted decay r^-" + std::to_string(p) +
                         " against weight s^" + std::to_string(q) + ")");
  return fR * std::pow(R, q + 1.0) / (p - q - 1.0);
}

RadialFunction derivative(const RadialFunction& f) {
  const auto& r = f.grid().r();
  const int n = f.size();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) {
    const int a = std::clamp(i - 1, 0, n - 3);
    const Eigen::MatrixXd c = fd_weights(r[i], {r[a], r[a + 1], r[a + 2]}, 1);
    d[i] = c(0, 1) * f[a] + c(1, 1) * f[a + 1] + c(2, 1) * f[a + 2];
  }
  return {f.grid_ptr(), std::move(d)};
}

RadialFunction dk_apply(int k, const RadialFunction& f) {
  Eigen::VectorXd v = derivative(f).values() + k * f.values().cwiseQuotient(f.grid().r());
  return {f.grid_ptr(), std::move(v)};
}

RadialFunction dk_inverse(double k, const RadialFunction& f) {
  const auto& r = f.grid().r();
  const PowerIntegrator integ(f.grid_ptr(), k);
  Eigen::VectorXd v;
  if (k > 0) {
    v = integ.from_origin(f.values());
  } else {
    v = integ.to_outer(f.values()).array() + power_tail(f, k);
    v = -v;
  }
  for (int i = 0; i < v.size(); ++i) v[i] *= std::pow(r[i], -k);
  return {f.grid_ptr(), std::move(v)};
}

RadialFunction delta_l_apply(int l, const RadialFunction& f) {
  if (l < 0) throw PreconditionError("delta_l_apply: l must be >= 0");
  const FdOperators ops = fd_operators(f.grid(), origin_closure_for_class(l));
  const auto& r = f.grid().r();
  Eigen::VectorXd v = ops.d2 * f.values();
  v += 2.0 * (ops.d1 * f.values()).cwiseQuotient(r);
  v -= l * (l + 1.0) * f.values().cwiseQuotient(r.cwiseProduct(r));
  return {f.grid_ptr(), std::move(v)};
}

RadialFunction delta_l_inverse(int l, const RadialFunction& f, InverseForm form) {
  if (l < 0) throw PreconditionError("delta_l_inverse: l must be >= 0");
  if (form == InverseForm::factorized) return dk_inverse(-l, dk_inverse(l + 2, f));
  const auto& r = f.grid().r();
  const PowerIntegrator inner(f.grid_ptr(), l + 2.0);
  const PowerIntegrator outer(f.grid_ptr(), 1.0 - l);
  const Eigen::VectorXd F = inner.from_origin(f.values());
  const Eigen::VectorXd B = outer.to_outer(f.values()).array() + power_tail(f, 1.0 - l);
  Eigen::VectorXd v(f.size());
  for (int i = 0; i < f.size(); ++i)
    v[i] = -(std::pow(r[i], -(l + 1.0)) * F[i] + std::pow(r[i], l) * B[i]) / (2.0 * l + 1.0);
  return {f.grid_ptr(), std::move(v)};
}

RadialFunction deriv_deltal_inverse(int l, const RadialFunction& f, InverseForm form) {
  if (l < 0) throw PreconditionError("deriv_deltal_inverse: l must be >= 0");
  const RadialFunction a = dk_inverse(l + 2, f);
  if (form == InverseForm::factorized) {
    if (l == 0) return a;
    const RadialFunction w = dk_inverse(-l, a);
    Eigen::VectorXd v = a.values() + l * w.values().cwiseQuotient(f.grid().r());
    return {f.grid_ptr(), std::move(v)};
  }
  if (l == 0) return a;
  const RadialFunction b = dk_inverse(-(l - 1), f);
  return {f.grid_ptr(), ((l + 1.0) * a.values() + l * b.values()) / (2.0 * l + 1.0)};
}

Eigen::MatrixXd dk_inverse_matrix(const GridPtr& grid, double k) {
  const auto& r = grid->r();
  const PowerIntegrator integ(grid, k);
  Eigen::MatrixXd m = k > 0 ? integ.from_origin_matrix() : Eigen::MatrixXd(-integ.to_outer_matrix());
  for (int i = 0; i < grid->size(); ++i) m.row(i) *= std::pow(r[i], -k);
  return m;
}

namespace {

// Factorized Δ_l^{-1} for inputs vanishing beyond rmax. The intermediate
// D_{l+2}^{-1}f equals F(R) r^{-(l+2)} past rmax, whose tail integral is
// added exactly as a rank-one term.
Eigen::MatrixXd factorized_inverse(const GridPtr& grid, int l, const Eigen::MatrixXd& dl2) {
  const auto& r = grid->r();
  const int n = grid->size();
  const double R = grid->rmax();
  Eigen::MatrixXd m = dk_inverse_matrix(grid, -l) * dl2;
  const Eigen::RowVectorXd last = dl2.row(n - 1) * std::pow(R, l + 2.0);  // F(R)
  const double tail = std::pow(R, -2.0 * l - 1.0) / (2.0 * l + 1.0);
  for (int i = 0; i < n; ++i) m.row(i) -= std::pow(r[i], l) * tail * last;
  return m;
}

}  // namespace

Eigen::MatrixXd delta_l_inverse_matrix(const GridPtr& grid, int l, InverseForm form) {
  if (l < 0) throw PreconditionError("delta_l_inverse_matrix: l must be >= 0");
  const Eigen::MatrixXd dl2 = dk_inverse_matrix(grid, l + 2.0);
  if (form == InverseForm::factorized) return factorized_inverse(grid, l, dl2);
  const auto& r = grid->r();
  const PowerIntegrator inner(grid, l + 2.0);
  const PowerIntegrator outer(grid, 1.0 - l);
  Eigen::MatrixXd F = inner.from_origin_matrix();
  Eigen::MatrixXd B = outer.to_outer_matrix();
  for (int i = 0; i < grid->size(); ++i) {
    F.row(i) *= std::pow(r[i], -(l + 1.0));
    B.row(i) *= std::pow(r[i], l);
  }
  return -(F + B) / (2.0 * l + 1.0);
}

Eigen::MatrixXd deriv_deltal_inverse_matrix(const GridPtr& grid, int l, InverseForm form) {
  if (l < 0) throw PreconditionError("deriv_deltal_inverse_matrix: l must be >= 0");
  const Eigen::MatrixXd dl2 = dk_inverse_matrix(grid, l + 2.0);
  if (l == 0) return dl2;
  if (form == InverseForm::factorized) {
    Eigen::MatrixXd w = factorized_inverse(grid, l, dl2);
    for (int i = 0; i < grid->size(); ++i) w.row(i) *= l / (*grid)[i];
    return dl2 + w;
  }
  return ((l + 1.0) * dl2 + l * dk_inverse_matrix(grid, -(l - 1.0))) / (2.0 * l + 1.0);
}

Eigen::VectorXd inner_weights(const RadialGrid& grid, const Weight& weight) {
  switch (weight.kind) {
    case Weight::Kind::flat:
      return grid.weights();
    case Weight::Kind::r2:
      return grid.r2_weights();
    case Weight::Kind::r2_custom: {
      Eigen::VectorXd w = grid.r2_weights();
      for (int i = 0; i < grid.size(); ++i) w[i] *= weight.omega(grid[i]);
      return w;
    }
  }
  return grid.weights();
}

double weighted_inner(const RadialFunction& f, const RadialFunction& g, const Weight& weight) {
  require_same_grid(f, g);
  const Eigen::VectorXd w = inner_weights(f.grid(), weight);
  return (w.array() * f.values().array() * g.values().array()).sum();
}

double norm_r2(const RadialFunction& f) { return std::sqrt(weighted_inner(f, f, Weight::r2())); }

double loglog_slope(const RadialFunction& f, double r_lo, double r_hi) {
  const auto& r = f.grid().r();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int i = 0; i < f.size(); ++i) {
    if (r[i] < r_lo || r[i] > r_hi) continue;
    const double a = std::abs(f[i]);
    if (!(a > 1e-300)) continue;
    const double x = std::log(r[i]), y = std::log(a);
    sx += x; sy += y; sxx += x * x; sxy += x * y; ++m;
  }
  if (m < 3) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace ksmode
