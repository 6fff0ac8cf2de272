#include "oblab/coefficients.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "oblab/io.hpp"

namespace oblab {

double SymMatrix2::eig_min() const {
  const double mean = 0.5 * (a11 + a22);
  const double d = 0.5 * (a11 - a22);
  return mean - std::sqrt(d * d + a12 * a12);
}

double SymMatrix2::eig_max() const {
  const double mean = 0.5 * (a11 + a22);
  const double d = 0.5 * (a11 - a22);
  return mean + std::sqrt(d * d + a12 * a12);
}

double SymMatrix2::max_abs_entry() const {
  return std::max({std::fabs(a11), std::fabs(a12), std::fabs(a22)});
}

RadialProfile RadialProfile::constant(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("RadialProfile::constant: non-finite value");
  }
  RadialProfile p;
  p.kind_ = Kind::Constant;
  p.value_ = value;
  return p;
}

RadialProfile RadialProfile::log_log_oscillation(double omega, double speed) {
  if (!(omega > 0.0) || !(omega < std::exp(-1.0))) {
    throw std::invalid_argument(
        "RadialProfile: omega must lie in (0, 1/e), got " +
        std::to_string(omega));
  }
  if (!(speed >= 1.0)) {
    throw std::invalid_argument("RadialProfile: phase speed must be >= 1");
  }
  RadialProfile p;
  p.kind_ = Kind::LogLogOscillation;
  p.omega_ = omega;
  p.speed_ = speed;
  return p;
}

RadialProfile RadialProfile::dyadic_step(double value_a, double value_b) {
  if (!std::isfinite(value_a) || !std::isfinite(value_b)) {
    throw std::invalid_argument("RadialProfile::dyadic_step: non-finite value");
  }
  RadialProfile p;
  p.kind_ = Kind::DyadicStep;
  p.va_ = value_a;
  p.vb_ = value_b;
  return p;
}

double RadialProfile::value_at(double r) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::LogLogOscillation: {
      if (r >= omega_) return 2.0;
      // The phase has no limit at r = 0; any bounded placeholder is fine for
      // quadrature since {0} has measure zero.
      if (r <= 0.0) return 2.5;
      // r < omega < 1/e, so log r < -1 and |log r| = -log r.
      const double L = -std::log(r);
      return 0.5 * (5.0 + std::cos(std::numbers::pi * speed_ * std::log(L)));
    }
    case Kind::DyadicStep: {
      if (r <= 0.0) return va_;
      // Annulus [2^{-(k+1)}, 2^{-k}) holds value_a for even k.
      const int k = static_cast<int>(std::floor(-std::log2(r))) ;
      return (((k % 2) + 2) % 2 == 0) ? va_ : vb_;
    }
  }
  return 0.0;
}

double RadialProfile::derivative_at(double r) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::LogLogOscillation: {
      if (r >= omega_ || r <= 0.0) return 0.0;
      // d/dr cos(pi s log(-log r)) = sin(pi s log L) * pi s / (r L),
      // with L = -log r.
      const double L = -std::log(r);
      return 0.5 * std::numbers::pi * speed_ * std::sin(std::numbers::pi * speed_ * std::log(L)) /
             (r * L);
    }
    case Kind::DyadicStep:
      throw std::logic_error(
          "RadialProfile::derivative_at: dyadic step profile has jumps");
  }
  return 0.0;
}

double RadialProfile::min_value() const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::LogLogOscillation:
      return 2.0;
    case Kind::DyadicStep:
      return std::min(va_, vb_);
  }
  return 0.0;
}

double RadialProfile::max_value() const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::LogLogOscillation:
      return 3.0;
    case Kind::DyadicStep:
      return std::max(va_, vb_);
  }
  return 0.0;
}

std::optional<double> RadialProfile::inner_constant() const {
  if (kind_ == Kind::Constant) return value_;
  return std::nullopt;
}

std::vector<double> RadialProfile::jump_radii(double lo, double hi) const {
  std::vector<double> out;
  if (kind_ != Kind::DyadicStep || !(lo < hi) || !(lo > 0.0)) return out;
  // Dyadic radii 2^{-k} inside [lo, hi].
  int k = std::max(0, static_cast<int>(std::ceil(-std::log2(hi))));
  for (; std::ldexp(1.0, -k) >= lo; ++k) {
    const double r = std::ldexp(1.0, -k);
    if (r <= hi && r >= lo) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double counterexample_omega(int m, double s) {
  if (m < 1 || m % 2 == 0) {
    throw std::invalid_argument(
        "counterexample_omega: junction index must be a positive odd integer");
  }
  return std::exp(-std::exp(m / s));
}

RadialProfile counterexample_profile(double omega, double s) {
  RadialProfile p = RadialProfile::log_log_oscillation(omega, s);
  // Continuity at the junction needs cos(pi s log|log omega|) = -1: the
  // inner branch then evaluates to (5 - 1)/2 = 2, matching the outer branch.
  const double phase = s * std::log(-std::log(omega));
  const double mismatch = std::fabs(std::cos(std::numbers::pi * phase) + 1.0);
  if (mismatch > 1e-12) {
    throw std::invalid_argument(
        "counterexample_profile: junction discontinuity " +
        std::to_string(0.5 * mismatch) +
        " exceeds 1e-12; omega must satisfy s*log|log omega| = odd integer");
  }
  return p;
}

namespace {

double radial_value(const RadialProfile& profile, double r, double h) {
  if (r == 0.0) {
    if (auto c = profile.inner_constant()) return *c;
    return profile.value_at(0.5 * h);
  }
  return profile.value_at(r);
}

CoefficientField make_field(const Grid& grid) {
  CoefficientField f;
  f.grid = grid;
  const size_t n = static_cast<size_t>(grid.size());
  f.a11.assign(n, 0.0);
  f.a12.assign(n, 0.0);
  f.a22.assign(n, 0.0);
  return f;
}

void validate_elliptic(CoefficientField& field, const char* what) {
  EllipticityReport rep = ellipticity_report(field);
  if (!rep.positive()) {
    throw std::invalid_argument(std::string(what) +
                                ": coefficient matrix not uniformly elliptic");
  }
  field.lambda_lo = rep.lambda_min;
  field.lambda_hi = rep.lambda_max;
}

}  // namespace

CoefficientField constant_field(const Grid& grid, const SymMatrix2& A) {
  if (!std::isfinite(A.a11) || !std::isfinite(A.a12) || !std::isfinite(A.a22)) {
    throw std::invalid_argument("constant_field: non-finite entries");
  }
  if (!(A.eig_min() > 0.0)) {
    throw std::invalid_argument(
        "constant_field: matrix must be positive definite");
  }
  CoefficientField f = make_field(grid);
  std::fill(f.a11.begin(), f.a11.end(), A.a11);
  std::fill(f.a12.begin(), f.a12.end(), A.a12);
  std::fill(f.a22.begin(), f.a22.end(), A.a22);
  f.lambda_lo = A.eig_min();
  f.lambda_hi = A.eig_max();
  return f;
}

CoefficientField radial_scalar_field(const Grid& grid,
                                     const RadialProfile& profile) {
  if (!(profile.min_value() > 0.0)) {
    throw std::invalid_argument(
        "radial_scalar_field: profile must be positive");
  }
  CoefficientField f = make_field(grid);
  const double h = grid.h();
  for (int j = 0; j < grid.n_cells; ++j) {
    for (int i = 0; i < grid.n_cells; ++i) {
      const Point c = grid.cell_center(i, j);
      const double r = std::hypot(c[0], c[1]);
      const double v = radial_value(profile, r, h);
      const int k = grid.index(i, j);
      f.a11[k] = v;
      f.a22[k] = v;
    }
  }
  validate_elliptic(f, "radial_scalar_field");
  return f;
}

EllipticityReport ellipticity_report(const CoefficientField& field) {
  EllipticityReport rep;
  rep.lambda_min = std::numeric_limits<double>::infinity();
  rep.lambda_max = -std::numeric_limits<double>::infinity();
  const double lo = field.lambda_lo, hi = field.lambda_hi;
  const double tol = 1e-12 * std::max(1.0, std::fabs(hi));
  for (size_t k = 0; k < field.a11.size(); ++k) {
    const SymMatrix2 A{field.a11[k], field.a12[k], field.a22[k]};
    const double emin = A.eig_min(), emax = A.eig_max();
    rep.lambda_min = std::min(rep.lambda_min, emin);
    rep.lambda_max = std::max(rep.lambda_max, emax);
    if (!(emin > 0.0)) ++rep.positivity_violations;
    if (emin < lo - tol || emax > hi + tol) ++rep.bound_violations;
  }
  return rep;
}

namespace {

/// Offsets and weights of the truncated quartic bump, reused per cell.
struct BumpStencil {
  int radius_cells;
  std::vector<double> weight;  // (2R+1)^2 patch, zero outside the bump
};

BumpStencil bump_stencil(double eps, double h) {
  BumpStencil b;
  b.radius_cells = static_cast<int>(std::floor(eps / h));
  const int w = 2 * b.radius_cells + 1;
  b.weight.assign(static_cast<size_t>(w) * w, 0.0);
  for (int dj = -b.radius_cells; dj <= b.radius_cells; ++dj) {
    for (int di = -b.radius_cells; di <= b.radius_cells; ++di) {
      const double rr = (di * di + dj * dj) * h * h / (eps * eps);
      if (rr >= 1.0) continue;
      const double t = 1.0 - rr;
      b.weight[static_cast<size_t>(dj + b.radius_cells) * w +
               (di + b.radius_cells)] = t * t;
    }
  }
  return b;
}

}  // namespace

ScalarField mollify(const ScalarField& field, double eps) {
  const Grid& g = field.grid;
  const double h = g.h();
  if (!(eps >= h)) {
    throw std::invalid_argument(
        "mollify: eps must be at least one cell spacing h");
  }
  const BumpStencil b = bump_stencil(eps, h);
  const int R = b.radius_cells, w = 2 * R + 1, n = g.n_cells;
  ScalarField out = ScalarField::zeros(g);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0, wsum = 0.0;
      const int djlo = std::max(-R, -j), djhi = std::min(R, n - 1 - j);
      const int dilo = std::max(-R, -i), dihi = std::min(R, n - 1 - i);
      for (int dj = djlo; dj <= djhi; ++dj) {
        const double* wrow = &b.weight[static_cast<size_t>(dj + R) * w + R];
        const double* frow = &field.values[g.index(i, j + dj)];
        for (int di = dilo; di <= dihi; ++di) {
          const double wt = wrow[di];
          acc += wt * frow[di];
          wsum += wt;
        }
      }
      out.values[g.index(i, j)] = acc / wsum;
    }
  }
  require_finite(out, "mollify");
  return out;
}

CoefficientField mollify(const CoefficientField& field, double eps) {
  CoefficientField out = field;
  ScalarField tmp{field.grid, field.a11};
  out.a11 = mollify(tmp, eps).values;
  tmp.values = field.a12;
  out.a12 = mollify(tmp, eps).values;
  tmp.values = field.a22;
  out.a22 = mollify(tmp, eps).values;
  // Convex averaging cannot leave the declared eigenvalue band.
  return out;
}

SymMatrix2 averaged_matrix(const CoefficientField& field, const Point& center,
                           double r) {
  const Grid& g = field.grid;
  if (!(r >= 2.0 * g.h())) {
    throw std::invalid_argument("averaged_matrix: radius must be >= 2h");
  }
  const Point o = g.origin();
  if (center[0] - r < o[0] || center[0] + r > o[0] + g.extent || center[1] - r < o[1] ||
      center[1] + r > o[1] + g.extent) {
    throw std::invalid_argument("averaged_matrix: ball leaves the grid");
  }
  const CellSet ball = ball_cells(g, center, r);
  SymMatrix2 acc;
  long count = 0;
  for (size_t k = 0; k < ball.mask.size(); ++k) {
    if (!ball.mask[k]) continue;
    acc.a11 += field.a11[k];
    acc.a12 += field.a12[k];
    acc.a22 += field.a22[k];
    ++count;
  }
  if (count == 0) {
    throw std::invalid_argument("averaged_matrix: ball contains no cells");
  }
  return {acc.a11 / count, acc.a12 / count, acc.a22 / count};
}

void write_coefficients(const std::filesystem::path& path,
                        const CoefficientField& field) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  const Grid& g = field.grid;
  out << "extent " << format_double(g.extent) << "\n";
  out << "n_cells " << g.n_cells << "\n";
  out << "center " << format_double(g.center[0]) << " "
      << format_double(g.center[1]) << "\n";
  for (size_t k = 0; k < field.a11.size(); ++k) {
    out << format_double(field.a11[k]) << " " << format_double(field.a12[k])
        << " " << format_double(field.a22[k]) << "\n";
  }
}

CoefficientField read_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  std::string key;
  double extent = 0;
  int n_cells = 0;
  Point center{};
  in >> key >> extent;
  if (key != "extent") throw std::runtime_error(path.string() + ": bad header");
  in >> key >> n_cells;
  if (key != "n_cells") throw std::runtime_error(path.string() + ": bad header");
  in >> key >> center[0] >> center[1];
  if (key != "center" || !in) {
    throw std::runtime_error(path.string() + ": bad header");
  }
  CoefficientField f = make_field(build_grid(extent, n_cells, center));
  for (size_t k = 0; k < f.a11.size(); ++k) {
    if (!(in >> f.a11[k] >> f.a12[k] >> f.a22[k])) {
      throw std::runtime_error(path.string() + ": truncated value section");
    }
  }
  validate_elliptic(f, "read_coefficients");
  return f;
}

}  // namespace oblab
