#pragma once

#include <Eigen/Sparse>

#include "ksmode/radial.hpp"

namespace ksmode {

// How the three-point stencil at the first node reaches the origin.
enum class OriginClosure {
  even,       // ghost f(0) from f ≈ a + b r^2 (class l = 0)
  vanish,     // ghost f(0) = 0 (class l >= 1, f ~ r^l)
  one_sided,  // no ghost; stencil on the first three nodes
};

inline OriginClosure origin_closure_for_class(int l) {
  return l == 0 ? OriginClosure::even : OriginClosure::vanish;
}

// Second-order first/second derivative matrices. Interior rows are centred
// three-point stencils; the last row is one-sided (4 points for d2).
struct FdOperators {
  Eigen::SparseMatrix<double> d1;
  Eigen::SparseMatrix<double> d2;
};

FdOperators fd_operators(const RadialGrid& grid, OriginClosure closure);

}  // namespace ksmode
