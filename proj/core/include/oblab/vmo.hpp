#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oblab/coefficients.hpp"
#include "oblab/grid.hpp"

namespace oblab {

/// A curve value per radius, radii decreasing. Carries either the
/// oscillation modulus eta(r) (nondecreasing in r by construction) or the
/// radial mean-square deviation psi(r); values are always >= 0.
struct VmoCurve {
  std::vector<double> radii;
  std::vector<double> values;
};

/// Max over the sampled balls of the mean absolute deviation from the ball
/// mean (cell quadrature). A certified lower bound of the true seminorm.
/// Radii must be >= 4h and every ball must stay inside the grid square.
double bmo_seminorm(const ScalarField& field, const std::vector<Point>& ball_centers,
                    const std::vector<double>& radii);

/// Oscillation modulus: for each r, the sup over sampled centers and tested
/// rho <= r of the mean absolute deviation. Centers sit on an every-4th-cell
/// sublattice; extra_centers (e.g. points on known discontinuity circles)
/// sharpen the lower bound. Balls are clipped to the grid. The curve is a
/// cumulative max, hence nondecreasing in r.
VmoCurve vmo_modulus(const ScalarField& field, const std::vector<double>& radii,
                     const std::vector<Point>& extra_centers = {});

struct DecayCondition {
  std::string name;
  /// False when a hypothesis (differentiability) blocks evaluation.
  bool evaluated = false;
  bool passes = false;
  /// Least-squares slope of log(value) against log(1/r): negative means the
  /// quantity decays as r -> 0.
  double decay_slope = 0.0;
  /// Quantity per radius (empty when not evaluated).
  std::vector<double> values;
  bool identically_zero = false;
};

/// Hypothesis report for the radial VMO criterion: square integrability of
/// the profile near 0, decay of x f(x)^2, decay of x f'(x), and decay of the
/// averaged integral (1/r) int_0^r x (f(r) - f(x)) f'(x) dx. The derivative
/// conditions are flagged as unevaluated for non-differentiable profiles.
struct RadialVmoReport {
  std::vector<double> radii;
  bool differentiable = false;
  bool square_integrable = false;
  double square_integral = 0.0;
  DecayCondition boundary_term;
  DecayCondition derivative_term;
  DecayCondition averaged_integral;

  bool all_pass() const {
    return square_integrable && boundary_term.passes && derivative_term.passes &&
           averaged_integral.passes;
  }
};

/// Evaluates the four radial-VMO hypotheses on (0, R] at the given decreasing
/// radii; integrals use adaptive quadrature at relative tolerance 1e-8.
RadialVmoReport bramanti_check(const RadialProfile& profile, double R,
                               const std::vector<double>& radii);

/// Mean-square deviation of the even extension of f on (-r, r):
/// psi(r) = (1/r) int_0^r f^2 - ((1/r) int_0^r f)^2, one value per radius.
VmoCurve psi_curve(const std::function<double(double)>& f, const std::vector<double>& radii);

/// psi curve of a closed-form radial profile.
VmoCurve psi_curve(const RadialProfile& profile, const std::vector<double>& radii);

}  // namespace oblab
