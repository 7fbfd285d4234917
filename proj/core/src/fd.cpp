#include "ksmode/fd.hpp"

#include <vector>

namespace ksmode {

FdOperators fd_operators(const RadialGrid& grid, OriginClosure closure) {
  const auto& r = grid.r();
  const int n = grid.size();
  std::vector<Eigen::Triplet<double>> t1, t2;
  t1.reserve(3 * n + 4);
  t2.reserve(3 * n + 4);

  auto add = [](std::vector<Eigen::Triplet<double>>& t, int i, int j, double v) {
    if (v != 0.0) t.emplace_back(i, j, v);
  };

  // First node
  if (closure == OriginClosure::one_sided) {
    const Eigen::MatrixXd c = fd_weights(r[0], {r[0], r[1], r[2]}, 2);
    for (int k = 0; k < 3; ++k) {
      add(t1, 0, k, c(k, 1));
      add(t2, 0, k, c(k, 2));
    }
  } else {
    const Eigen::MatrixXd c = fd_weights(r[0], {0.0, r[0], r[1]}, 2);
    // ghost value g = a0 f0 + a1 f1
    double a0 = 0.0, a1 = 0.0;
    if (closure == OriginClosure::even) {
      const double s0 = r[0] * r[0], s1 = r[1] * r[1];
      a0 = s1 / (s1 - s0);
      a1 = -s0 / (s1 - s0);
    }
    add(t1, 0, 0, c(1, 1) + c(0, 1) * a0);
    add(t1, 0, 1, c(2, 1) + c(0, 1) * a1);
    add(t2, 0, 0, c(1, 2) + c(0, 2) * a0);
    add(t2, 0, 1, c(2, 2) + c(0, 2) * a1);
  }

  for (int i = 1; i + 1 < n; ++i) {
    const Eigen::MatrixXd c = fd_weights(r[i], {r[i - 1], r[i], r[i + 1]}, 2);
    for (int k = 0; k < 3; ++k) {
      add(t1, i, i - 1 + k, c(k, 1));
      add(t2, i, i - 1 + k, c(k, 2));
    }
  }

  const int e = n - 1;
  const Eigen::MatrixXd c3 = fd_weights(r[e], {r[e - 2], r[e - 1], r[e]}, 1);
  for (int k = 0; k < 3; ++k) add(t1, e, e - 2 + k, c3(k, 1));
  const Eigen::MatrixXd c4 = fd_weights(r[e], {r[e - 3], r[e - 2], r[e - 1], r[e]}, 2);
  for (int k = 0; k < 4; ++k) add(t2, e, e - 3 + k, c4(k, 2));

  FdOperators ops;
  ops.d1.resize(n, n);
  ops.d2.resize(n, n);
  ops.d1.setFromTriplets(t1.begin(), t1.end());
  ops.d2.setFromTriplets(t2.begin(), t2.end());
  return ops;
}

}  // namespace ksmode
