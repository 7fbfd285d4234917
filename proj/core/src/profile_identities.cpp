#include <algorithm>
#include <cmath>

#include "ksmode/operators.hpp"
#include "ksmode/profile.hpp"

namespace ksmode::profile {

IdentityResiduals identity_residuals(const GridPtr& grid) {
  IdentityResiduals out{0.0, 0.0, 0.0};
  const auto& r = grid->r();

  const OperatorMatrix l1 = ops::assemble_Ll(1, grid);
  const RadialFunction dq = sample_dq(grid);
  const Eigen::VectorXd res = l1.entries * dq.values() + 0.5 * dq.values();
  for (int i = 0; i + 1 < grid->size(); ++i)
    if (r[i] >= 0.5 && r[i] <= 0.5 * grid->rmax()) out.i = std::max(out.i, std::abs(res[i]));

  for (int i = 0; i < grid->size(); ++i) {
    const double x = r[i];
    if (x >= 0.01 && x <= 50.0) {
      const double d = d2inv_q_closed(x);
      const double v = -q_deriv(x, 1) + 0.5 * x * q(x) - 0.5 * d - q(x) * d;
      out.ii = std::max(out.ii, std::abs(v));
    }
    if (x >= 0.1 && x <= 20.0) {
      const double p0 = g_over_G(x, 0), p1 = g_over_G(x, 1), p2 = g_over_G(x, 2);
      const double v = -p2 + coeff_a(x) * p1 + coeff_b(x) * p0 + p0 + 2.0 / x * d2inv_q_closed(x) * p0;
      out.iii = std::max(out.iii, std::abs(v));
    }
  }
  return out;
}

}  // namespace ksmode::profile
