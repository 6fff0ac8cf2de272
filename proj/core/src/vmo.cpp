#include "oblab/vmo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oblab/quadrature.hpp"

namespace oblab {

namespace {

/// Mean absolute deviation of the field over the cells of B_rho(c) clipped to
/// the grid; returns 0 when no cell center falls inside.
double mean_oscillation(const ScalarField& field, const Point& c, double rho) {
  const Grid& g = field.grid;
  const Point o = g.origin();
  const double h = g.h();
  const int n = g.n_cells;
  const int i_lo = std::max(0, static_cast<int>(std::floor((c[0] - rho - o[0]) / h - 0.5)));
  const int i_hi = std::min(n - 1, static_cast<int>(std::ceil((c[0] + rho - o[0]) / h - 0.5)));
  const int j_lo = std::max(0, static_cast<int>(std::floor((c[1] - rho - o[1]) / h - 0.5)));
  const int j_hi = std::min(n - 1, static_cast<int>(std::ceil((c[1] + rho - o[1]) / h - 0.5)));
  const double r2 = rho * rho;

  double sum = 0.0;
  long count = 0;
  for (int j = j_lo; j <= j_hi; ++j) {
    for (int i = i_lo; i <= i_hi; ++i) {
      const Point p = g.cell_center(i, j);
      const double dx = p[0] - c[0], dy = p[1] - c[1];
      if (dx * dx + dy * dy >= r2) continue;
      sum += field.values[g.index(i, j)];
      ++count;
    }
  }
  if (count == 0) return 0.0;
  const double mean = sum / count;

  double dev = 0.0;
  for (int j = j_lo; j <= j_hi; ++j) {
    for (int i = i_lo; i <= i_hi; ++i) {
      const Point p = g.cell_center(i, j);
      const double dx = p[0] - c[0], dy = p[1] - c[1];
      if (dx * dx + dy * dy >= r2) continue;
      dev += std::abs(field.values[g.index(i, j)] - mean);
    }
  }
  return dev / count;
}

/// Least-squares slope of log(value) against log(1/r) over positive samples.
void fit_decay(const std::vector<double>& radii, DecayCondition& cond) {
  cond.identically_zero = true;
  for (const double v : cond.values)
    if (std::abs(v) > 1e-300) cond.identically_zero = false;
  if (cond.identically_zero) {
    cond.decay_slope = 0.0;
    cond.passes = true;
    return;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long m = 0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double v = std::abs(cond.values[k]);
    if (v <= 1e-300) continue;
    const double x = std::log(1.0 / radii[k]);
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) {
    cond.decay_slope = 0.0;
    cond.passes = false;
    return;
  }
  const double denom = m * sxx - sx * sx;
  cond.decay_slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  cond.passes = cond.decay_slope < 0.0;
}

void validate_decreasing_radii(const std::vector<double>& radii, double min_allowed,
                               const char* what) {
  if (radii.empty()) throw std::invalid_argument(std::string(what) + ": no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] >= min_allowed))
      throw std::invalid_argument(std::string(what) + ": radius below the resolvable scale");
    if (k > 0 && !(radii[k] < radii[k - 1]))
      throw std::invalid_argument(std::string(what) + ": radii must be decreasing");
  }
}

}  // namespace

double bmo_seminorm(const ScalarField& field, const std::vector<Point>& ball_centers,
                    const std::vector<double>& radii) {
  const Grid& g = field.grid;
  validate_decreasing_radii(radii, 4.0 * g.h(), "bmo_seminorm");
  const Point o = g.origin();
  for (const Point& c : ball_centers)
    for (const double r : radii)
      if (c[0] - r < o[0] || c[0] + r > o[0] + g.extent || c[1] - r < o[1] ||
          c[1] + r > o[1] + g.extent)
        throw std::invalid_argument("bmo_seminorm: sampled ball leaves the grid");

  double sup = 0.0;
  for (const Point& c : ball_centers)
    for (const double r : radii) sup = std::max(sup, mean_oscillation(field, c, r));
  return sup;
}

VmoCurve vmo_modulus(const ScalarField& field, const std::vector<double>& radii,
                     const std::vector<Point>& extra_centers) {
  const Grid& g = field.grid;
  validate_decreasing_radii(radii, 4.0 * g.h(), "vmo_modulus");

  std::vector<Point> centers;
  for (int j = 2; j < g.n_cells; j += 4)
    for (int i = 2; i < g.n_cells; i += 4) centers.push_back(g.cell_center(i, j));
  centers.insert(centers.end(), extra_centers.begin(), extra_centers.end());

  std::vector<double> per_radius(radii.size(), 0.0);
  for (std::size_t k = 0; k < radii.size(); ++k)
    for (const Point& c : centers)
      per_radius[k] = std::max(per_radius[k], mean_oscillation(field, c, radii[k]));

  // Cumulative sup over tested rho <= r; radii are stored decreasing, so the
  // suffix max makes the curve nondecreasing in r.
  VmoCurve curve;
  curve.radii = radii;
  curve.values = per_radius;
  for (std::size_t k = radii.size(); k-- > 1;)
    curve.values[k - 1] = std::max(curve.values[k - 1], curve.values[k]);
  return curve;
}

RadialVmoReport bramanti_check(const RadialProfile& profile, double R,
                               const std::vector<double>& radii) {
  if (!(R > 0.0)) throw std::invalid_argument("bramanti_check: R must be positive");
  validate_decreasing_radii(radii, 0.0, "bramanti_check");
  if (radii.front() > R)
    throw std::invalid_argument("bramanti_check: radii must lie inside (0, R]");

  RadialVmoReport report;
  report.radii = radii;
  report.differentiable = profile.differentiable();

  // Substituting x = R e^{-t} turns the accumulation of oscillations at 0
  // into a slowly varying integrand with exponentially decaying weight; the
  // truncation tail at t = 46 is below 1e-19 * sup f^2 * R.
  const QuadratureResult sq = adaptive_simpson(
      [&](double t) {
        const double x = R * std::exp(-t);
        const double f = profile.value_at(x);
        return f * f * x;
      },
      0.0, 46.0, 1e-8, 1e-16);
  const bool bounded =
      std::isfinite(profile.min_value()) && std::isfinite(profile.max_value());
  report.square_integral = sq.value;
  report.square_integrable = std::isfinite(sq.value) && (sq.converged || bounded);

  report.boundary_term.name = "x f(x)^2";
  report.boundary_term.evaluated = true;
  for (const double r : radii) {
    const double f = profile.value_at(r);
    report.boundary_term.values.push_back(r * f * f);
  }
  fit_decay(radii, report.boundary_term);

  report.derivative_term.name = "x f'(x)";
  report.averaged_integral.name = "(1/r) int_0^r x (f(r)-f(x)) f'(x) dx";
  if (!report.differentiable) {
    // Jump profiles fail the C^1 hypothesis; both derivative conditions are
    // reported as unevaluated failures rather than computed.
    report.derivative_term.evaluated = false;
    report.derivative_term.passes = false;
    report.averaged_integral.evaluated = false;
    report.averaged_integral.passes = false;
    return report;
  }

  report.derivative_term.evaluated = true;
  for (const double r : radii)
    report.derivative_term.values.push_back(std::abs(r * profile.derivative_at(r)));
  fit_decay(radii, report.derivative_term);

  report.averaged_integral.evaluated = true;
  for (const double r : radii) {
    const double fr = profile.value_at(r);
    // Substitute x = r e^{-t}: the integral becomes
    // int_0^inf x^2 (f(r) - f(x)) f'(x) dt, truncated where x ~ 1e-20 r.
    const QuadratureResult q = adaptive_simpson(
        [&](double t) {
          const double x = r * std::exp(-t);
          return x * x * (fr - profile.value_at(x)) * profile.derivative_at(x);
        },
        0.0, 46.0, 1e-8, 1e-16);
    report.averaged_integral.values.push_back(std::abs(q.value / r));
  }
  fit_decay(radii, report.averaged_integral);
  return report;
}

VmoCurve psi_curve(const std::function<double(double)>& f, const std::vector<double>& radii) {
  validate_decreasing_radii(radii, 0.0, "psi_curve");
  VmoCurve curve;
  curve.radii = radii;
  for (const double r : radii) {
    const QuadratureResult sq =
        adaptive_simpson([&](double x) { const double v = f(x); return v * v; }, 0.0, r, 1e-8,
                         1e-16);
    const QuadratureResult mean = adaptive_simpson(f, 0.0, r, 1e-8, 1e-16);
    const double m = mean.value / r;
    curve.values.push_back(std::max(0.0, sq.value / r - m * m));
  }
  return curve;
}

VmoCurve psi_curve(const RadialProfile& profile, const std::vector<double>& radii) {
  return psi_curve([&](double x) { return profile.value_at(x); }, radii);
}

}  // namespace oblab
