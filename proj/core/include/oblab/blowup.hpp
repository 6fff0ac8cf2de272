#pragma once

#include <vector>

#include "oblab/coefficients.hpp"
#include "oblab/grid.hpp"
#include "oblab/obstacle.hpp"

namespace oblab {

/// A constant-coefficient half-space solution used as a comparison target:
/// q(x) = (1 / (2 nu^T A nu)) ((x . nu - beta)_+)^2, which satisfies
/// a^{ij} D_ij q = 1 on {q > 0} for the constant matrix A.
struct ReferenceProfile {
  SymMatrix2 A{1.0, 0.0, 1.0};
  Point nu{0.0, 1.0};
};

/// One quadratic rescaling w_r(x) = r^{-2} w(r x) together with the
/// coefficient ball-average at the same scale and the comparison distances.
struct BlowupRecord {
  double r = 0.0;
  ScalarField rescaled;
  SymMatrix2 A_r{1.0, 0.0, 1.0};
  /// Free-boundary offset along the first reference normal, fitted from the
  /// rescaled field before comparing (the offset drifts with r).
  double beta_hat = 0.0;
  /// Max-norm distance on B_{1/2} to each reference profile, excluding a
  /// collar around the fitted free boundary.
  std::vector<double> distances;
  double min_value = 0.0;
};

/// Quadratic rescaling: out value at x is r^{-2} sample(sol_field, r x).
/// Requires r >= 8 h_source and r * (out hull) inside the source hull.
ScalarField rescale(const ScalarField& sol_field, double r, const Grid& out_grid);

/// Evaluates the half-space profile at every cell center. nu must be unit
/// length and A elliptic.
ScalarField halfspace_profile(const SymMatrix2& A, const Point& nu, double beta,
                              const Grid& grid);

/// Blowup records at the origin of a solved problem, one per radius
/// (decreasing, each >= 8 h_source). Per radius: rescale onto out_grid,
/// average the coefficients over B_r, fit the free-boundary offset from the
/// rescaled field, and measure collar-excluded max-norm distances to every
/// reference.
std::vector<BlowupRecord> blowup_sequence(const ObstacleSolution& sol,
                                          const CoefficientField& coeffs,
                                          const std::vector<double>& radii,
                                          const std::vector<ReferenceProfile>& references,
                                          const Grid& out_grid, double collar_factor = 4.0);

/// Offset along nu fitted from a field that is approximately a half-space
/// profile: least squares of sqrt(value) against x . nu over clearly positive
/// cells in B_{1/2}, reading off the zero crossing.
double fit_halfspace_offset(const ScalarField& field, const Point& nu);

struct BetaPin {
  /// Contact-side endpoint of the final bracket; the returned solution is
  /// the solve at this datum offset.
  double beta = 0.0;
  double beta_lo = 0.0;
  double beta_hi = 0.0;
  ObstacleSolution solution;
  int solves = 0;
  /// True when the first-quadrant origin cell is a free-boundary cell.
  bool origin_on_fb = false;
};

/// Pins the origin to the free boundary by bisecting the offset beta of the
/// half-space Dirichlet datum built from (datum_A, nu). The bracket must
/// start with the origin cell active at beta_lo and in contact at beta_hi
/// (the datum decreases pointwise in beta, so the flip is monotone);
/// bisection stops at bracket width h^2. Solves are warm-started from the
/// previous contact set; warm_start, when given, seeds the first solve
/// (e.g. with a contact set resampled from a coarser pin).
BetaPin pin_origin_to_fb(const StencilOperator& op, const SymMatrix2& datum_A, const Point& nu,
                         double beta_lo, double beta_hi, double tol,
                         const CellSet* warm_start = nullptr);

}  // namespace oblab
