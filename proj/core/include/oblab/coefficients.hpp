#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oblab/grid.hpp"

namespace oblab {

/// Symmetric 2x2 matrix, off-diagonal stored once.
struct SymMatrix2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double eig_min() const;
  double eig_max() const;
  /// Quadratic form nu^T A nu.
  double quad(const Point& nu) const {
    return a11 * nu[0] * nu[0] + 2.0 * a12 * nu[0] * nu[1] +
           a22 * nu[1] * nu[1];
  }
  /// Largest absolute entry, the matrix norm used by the growth bounds.
  double max_abs_entry() const;
};

/// Closed-form scalar profile of the radius, used for radial coefficient
/// families and the 1-D oscillation analysis.
///
/// Kinds:
///  - Constant: f(r) = c.
///  - LogLogOscillation: f(r) = 2 for r >= omega,
///    (5 + cos(pi * speed * log|log r|)) / 2 for r < omega. The junction is
///    continuous when speed * log|log omega| is an odd integer.
///  - DyadicStep: value_a on annuli [2^{-(k+1)}, 2^{-k}) with k even,
///    value_b on odd k. Discontinuous at every dyadic radius.
class RadialProfile {
 public:
  enum class Kind { Constant, LogLogOscillation, DyadicStep };

  static RadialProfile constant(double value);
  static RadialProfile log_log_oscillation(double omega, double speed);
  static RadialProfile dyadic_step(double value_a, double value_b);

  Kind kind() const { return kind_; }
  /// Value at radius r > 0. At r <= 0 (reached only as a measure-zero
  /// quadrature endpoint) a bounded in-range placeholder is returned.
  double value_at(double r) const;
  /// Analytic derivative. Throws for profiles with jumps.
  double derivative_at(double r) const;
  bool differentiable() const { return kind_ != Kind::DyadicStep; }

  double min_value() const;
  double max_value() const;
  /// Limit as r -> 0+ along a constant inner branch, if the profile has one.
  std::optional<double> inner_constant() const;
  /// Discontinuity radii inside [lo, hi], ascending. Empty for smooth kinds.
  std::vector<double> jump_radii(double lo, double hi) const;

  double omega() const { return omega_; }
  double speed() const { return speed_; }
  double value_a() const { return va_; }
  double value_b() const { return vb_; }

 private:
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;             // Constant
  double omega_ = 0.0, speed_ = 0.0;  // LogLogOscillation
  double va_ = 0.0, vb_ = 0.0;     // DyadicStep
};

/// The oscillating coefficient profile with a continuous junction at omega.
/// Requires 0 < omega < 1/e, s >= 1, and speed * log|log omega| within
/// 1e-12 of an odd integer (otherwise the two branches would not meet).
RadialProfile counterexample_profile(double omega, double s);

/// Junction radius exp(-exp(m / s)) that makes counterexample_profile
/// continuous; m must be a positive odd integer.
double counterexample_omega(int m, double s);

/// Per-cell symmetric coefficient matrix with declared eigenvalue bounds.
/// Constructors guarantee every cell's eigenvalues lie in
/// [lambda_lo, lambda_hi] with lambda_lo > 0.
struct CoefficientField {
  Grid grid;
  std::vector<double> a11, a12, a22;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;

  SymMatrix2 at(int i, int j) const {
    const int k = grid.index(i, j);
    return {a11[k], a12[k], a22[k]};
  }
};

struct EllipticityReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// Cells whose smallest eigenvalue is not strictly positive.
  long positivity_violations = 0;
  /// Cells whose eigenvalues leave the declared [lambda_lo, lambda_hi].
  long bound_violations = 0;

  bool positive() const { return positivity_violations == 0; }
};

/// Constant matrix everywhere; bounds set to its eigenvalues.
CoefficientField constant_field(const Grid& grid, const SymMatrix2& A);

/// a(x) = f(|x|) I with |x| measured from the coordinate origin. At a cell
/// center exactly on the origin the profile's inner constant is used if it
/// has one, else f(h/2).
CoefficientField radial_scalar_field(const Grid& grid,
                                     const RadialProfile& profile);

/// Min/max per-cell eigenvalues plus violation counts against the declared
/// bounds. Does not throw; constructors use it to validate.
EllipticityReport ellipticity_report(const CoefficientField& field);

/// Discrete convolution with the normalized quartic bump
/// (1 - (|x|/eps)^2)^2 of radius eps, truncated and renormalized at the grid
/// edge. Requires eps >= h. Linear and monotone; exact on constants.
ScalarField mollify(const ScalarField& field, double eps);
CoefficientField mollify(const CoefficientField& field, double eps);

/// Entrywise mean of the coefficients over ball_cells(center, r).
/// Requires r >= 2h and a nonempty ball inside the grid.
SymMatrix2 averaged_matrix(const CoefficientField& field, const Point& center,
                           double r);

/// Three-channel persistence in the field format (a11 a12 a22 per line).
void write_coefficients(const std::filesystem::path& path,
                        const CoefficientField& field);
CoefficientField read_coefficients(const std::filesystem::path& path);

}  // namespace oblab
