#pragma once

#include <array>
#include <vector>

#include "oblab/coefficients.hpp"
#include "oblab/grid.hpp"

namespace oblab {

/// Neighbor order of a stencil row. C is the cell itself; the diagonal pair
/// used for the cross term depends on the sign of a12.
enum StencilDir : int {
  kC = 0,
  kE = 1,
  kW = 2,
  kN = 3,
  kS = 4,
  kNE = 5,
  kNW = 6,
  kSE = 7,
  kSW = 8,
};

/// Discrete nondivergence operator L w = a11 D11 w + 2 a12 D12 w + a22 D22 w
/// on the 9-point neighborhood of each interior cell.
///
/// D11 and D22 are 3-point central second differences. The cross term is
/// discretized through second differences along the diagonal matching the
/// sign of a12:
///   a12 >= 0:  L = (a11 - a12) dxx + (a22 - a12) dyy + a12 d_{NE/SW}
///   a12 <  0:  L = (a11 + a12) dxx + (a22 + a12) dyy - a12 d_{NW/SE}
/// where d_{NE/SW} q = (q_NE - 2 q_C + q_SW)/h^2. Each piece is exact on
/// quadratics, so the combination reproduces a^{ij} D_{ij} q exactly, and all
/// off-center weights are nonnegative exactly when |a12| <= min(a11, a22).
/// Boundary cells (the one-cell Dirichlet ring) carry no stencil row.
struct StencilOperator {
  Grid grid;
  CoefficientField coeffs;
  /// One row of 9 weights per cell; only interior rows are populated.
  std::vector<std::array<double, 9>> weights;

  bool is_interior(int i, int j) const { return !grid.is_boundary(i, j); }
};

/// Builds the stencil from the coefficient field.
StencilOperator assemble(const CoefficientField& coeffs);

/// Applies L to a field: L w on interior cells, 0 on the boundary ring.
ScalarField apply(const StencilOperator& op, const ScalarField& w);

struct MonotonicityReport {
  /// Number of (cell, neighbor) weights that violate the sign pattern
  /// (off-center weights must be >= 0, the center weight < 0).
  long violation_count = 0;
  double worst_magnitude = 0.0;

  bool monotone() const { return violation_count == 0; }
};

/// Checks the discrete maximum-principle sign pattern row by row.
MonotonicityReport monotonicity_report(const StencilOperator& op);

}  // namespace oblab
