#pragma once

#include <functional>

namespace oblab {

struct QuadratureResult {
  double value = 0.0;
  /// False if any subinterval hit the depth cap before meeting its tolerance.
  bool converged = true;
  long evaluations = 0;
};

/// Adaptive Simpson integration of f over [a, b].
///
/// Subintervals are split until the local Richardson error estimate drops
/// below the tolerance share, where the global target is
/// max(abs_floor, rel_tol * |first whole-interval estimate|).
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, double abs_floor = 1e-14, int max_depth = 30);

}  // namespace oblab
