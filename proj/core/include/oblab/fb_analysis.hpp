#pragma once

#include <vector>

#include "oblab/grid.hpp"
#include "oblab/obstacle.hpp"
#include "oblab/stencil.hpp"

namespace oblab {

/// Zero-set densities g(r) = |contact cells in B_r| / |cells in B_r| around a
/// fixed center, on a decreasing radius ladder. The cell-count ratio keeps
/// g in [0, 1] exactly and agrees with the area ratio up to O(h/r).
struct DensityProfile {
  Point center{0.0, 0.0};
  std::vector<double> radii;
  std::vector<double> g_values;
};

/// Densities of the contact set around center. Radii must be decreasing,
/// each >= 4h, with every ball inside the grid square.
DensityProfile density_profile(const ObstacleSolution& sol, const Point& center,
                               const std::vector<double>& radii);

enum class Verdict { Regular, Singular, Undetermined };

struct ClassificationVerdict {
  Verdict verdict = Verdict::Undetermined;
  double eps = 0.0;
  double r0 = 0.0;
  double tau = 0.0;
  /// Radius witnessing the Regular pattern; 0 when not Regular.
  double witness_t = 0.0;
};

/// Two-threshold density classification: Regular needs some tested t <= r0
/// with g(t) >= eps and g(r) >= 1/2 - eps at every tested r <= tau*t;
/// Singular needs g(r) <= eps at every tested r <= r0. Requires
/// 0 < eps < 1/8, r0 > 0, and 0 < tau <= 1.
ClassificationVerdict classify(const DensityProfile& profile, double eps, double r0, double tau);

/// Least width over 180 directions (1-degree steps) of the projection of the
/// cell centers inside the window, plus one h for cell extent. Empty -> 0.
double minimum_diameter(const CellSet& cells, const Ball& window);

/// h^2 times the number of cells inside the window that belong to exactly
/// one of the two sets. A metric on cell sets restricted to the window.
double symmetric_difference_measure(const CellSet& s1, const CellSet& s2, const Ball& window);

struct NondegeneracyRow {
  Point center{0.0, 0.0};
  double r = 0.0;
  double sup_w = 0.0;
  /// Quadratic growth floor r^2 / (2 * dim * max |a|) with dim = 2 and
  /// max |a| taken over the coefficient entries on B_r(center).
  double required = 0.0;
  double margin = 0.0;
  bool violated = false;
};

struct NondegeneracyReport {
  std::vector<NondegeneracyRow> rows;
  long violations() const;
};

/// Quadratic lower-growth check at each (center, radius) pair. Centers must
/// lie in the closure of the active set (an active cell or next to one);
/// radii must be >= 8h with B_r(center) inside the grid. A row is flagged
/// only when sup w falls more than h below the floor (discretization slack).
NondegeneracyReport nondegeneracy_report(const ObstacleSolution& sol, const StencilOperator& op,
                                         const std::vector<Point>& centers,
                                         const std::vector<double>& radii);

/// (sum over cells of (|w|^p + |Dw|^p + |D^2 w|^p) h^2)^(1/p) with central
/// differences inside and one-sided differences on the ring. Diagnostic
/// norm; requires p >= 1.
double discrete_sobolev_norm(const ScalarField& field, double p);

}  // namespace oblab
