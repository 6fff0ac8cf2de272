#include "oblab/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oblab {

ScalarField rescale(const ScalarField& sol_field, double r, const Grid& out_grid) {
  const Grid& src = sol_field.grid;
  if (!(r >= 8.0 * src.h()))
    throw std::invalid_argument("rescale: radius below 8h of the source grid");
  // All four corners of the out-grid cell-center hull must map into the
  // source hull.
  const double half = 0.5 * out_grid.extent - 0.5 * out_grid.h();
  for (const double sx : {-1.0, 1.0}) {
    for (const double sy : {-1.0, 1.0}) {
      const Point corner{out_grid.center[0] + sx * half, out_grid.center[1] + sy * half};
      const Point mapped{r * corner[0], r * corner[1]};
      if (!src.in_hull(mapped))
        throw std::invalid_argument("rescale: scaled output hull leaves the source grid");
    }
  }

  ScalarField out = ScalarField::zeros(out_grid);
  const double inv_r2 = 1.0 / (r * r);
  const int n = out_grid.n_cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point x = out_grid.cell_center(i, j);
      out.values[out_grid.index(i, j)] = inv_r2 * sample(sol_field, {r * x[0], r * x[1]});
    }
  }
  require_finite(out, "rescale output");
  return out;
}

ScalarField halfspace_profile(const SymMatrix2& A, const Point& nu, double beta,
                              const Grid& grid) {
  const double norm = std::hypot(nu[0], nu[1]);
  if (std::abs(norm - 1.0) > 1e-12)
    throw std::invalid_argument("halfspace_profile: normal must be a unit vector");
  const double curvature = A.quad(nu);
  if (!(A.eig_min() > 0.0))
    throw std::invalid_argument("halfspace_profile: matrix must be elliptic");
  const double scale = 1.0 / (2.0 * curvature);

  ScalarField out = ScalarField::zeros(grid);
  const int n = grid.n_cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point x = grid.cell_center(i, j);
      const double t = x[0] * nu[0] + x[1] * nu[1] - beta;
      out.values[grid.index(i, j)] = t > 0.0 ? scale * t * t : 0.0;
    }
  }
  return out;
}

double fit_halfspace_offset(const ScalarField& field, const Point& nu) {
  const Grid& g = field.grid;
  const double floor = 1e-8;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  long m = 0;
  double t_min_active = std::numeric_limits<double>::infinity();
  const int n = g.n_cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point x = g.cell_center(i, j);
      if (x[0] * x[0] + x[1] * x[1] >= 0.25) continue;
      const double v = field.values[g.index(i, j)];
      if (v <= floor) continue;
      const double t = x[0] * nu[0] + x[1] * nu[1];
      const double y = std::sqrt(v);
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
      ++m;
      t_min_active = std::min(t_min_active, t);
    }
  }
  if (m < 4) return 0.5;  // no meaningful positivity set inside B_{1/2}
  const double denom = m * stt - st * st;
  const double slope = denom != 0.0 ? (m * sty - st * sy) / denom : 0.0;
  if (!(slope > 1e-8)) return t_min_active - g.h();
  const double intercept = (sy - slope * st) / m;
  return -intercept / slope;
}

std::vector<BlowupRecord> blowup_sequence(const ObstacleSolution& sol,
                                          const CoefficientField& coeffs,
                                          const std::vector<double>& radii,
                                          const std::vector<ReferenceProfile>& references,
                                          const Grid& out_grid, double collar_factor) {
  const Grid& src = sol.w.grid;
  if (!src.same_as(coeffs.grid))
    throw std::invalid_argument("blowup_sequence: coefficients live on a different grid");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] < radii[k - 1]))
      throw std::invalid_argument("blowup_sequence: radii must be decreasing");
  for (const ReferenceProfile& ref : references) {
    const double norm = std::hypot(ref.nu[0], ref.nu[1]);
    if (std::abs(norm - 1.0) > 1e-12)
      throw std::invalid_argument("blowup_sequence: reference normal must be unit length");
  }

  const double h_out = out_grid.h();
  const double collar = collar_factor * h_out;
  std::vector<BlowupRecord> records;
  records.reserve(radii.size());
  for (const double r : radii) {
    BlowupRecord record;
    record.r = r;
    record.rescaled = rescale(sol.w, r, out_grid);
    record.A_r = averaged_matrix(coeffs, {0.0, 0.0}, r);

    double min_value = std::numeric_limits<double>::infinity();
    const int n = out_grid.n_cells;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Point x = out_grid.cell_center(i, j);
        if (x[0] * x[0] + x[1] * x[1] >= 0.25) continue;
        min_value = std::min(min_value, record.rescaled.values[out_grid.index(i, j)]);
      }
    record.min_value = std::isfinite(min_value) ? min_value : 0.0;

    record.distances.reserve(references.size());
    for (std::size_t ri = 0; ri < references.size(); ++ri) {
      const ReferenceProfile& ref = references[ri];
      const double beta = fit_halfspace_offset(record.rescaled, ref.nu);
      if (ri == 0) record.beta_hat = beta;
      const ScalarField q = halfspace_profile(ref.A, ref.nu, beta, out_grid);
      double dist = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const Point x = out_grid.cell_center(i, j);
          if (x[0] * x[0] + x[1] * x[1] >= 0.25) continue;
          const double t = x[0] * ref.nu[0] + x[1] * ref.nu[1] - beta;
          if (std::abs(t) < collar) continue;
          const long k = out_grid.index(i, j);
          dist = std::max(dist, std::abs(record.rescaled.values[k] - q.values[k]));
        }
      }
      record.distances.push_back(dist);
    }
    records.push_back(std::move(record));
  }
  return records;
}

BetaPin pin_origin_to_fb(const StencilOperator& op, const SymMatrix2& datum_A, const Point& nu,
                         double beta_lo, double beta_hi, double tol,
                         const CellSet* warm_start) {
  const Grid& g = op.grid;
  if (!(beta_lo < beta_hi)) throw std::invalid_argument("pin_origin_to_fb: empty bracket");
  const int oi = g.n_cells / 2;  // first-quadrant cell touching the origin
  const int oj = g.n_cells / 2;

  auto solve_at = [&](double beta, const CellSet* warm) {
    const ScalarField psi = halfspace_profile(datum_A, nu, beta, g);
    return solve_obstacle(op, psi, tol, warm);
  };

  BetaPin pin;
  pin.beta_lo = beta_lo;
  pin.beta_hi = beta_hi;

  ObstacleSolution at_lo = solve_at(beta_lo, warm_start);
  ++pin.solves;
  if (at_lo.contact.contains(oi, oj))
    throw std::runtime_error(
        "pin_origin_to_fb: origin already in contact at the lower bracket end");
  ObstacleSolution at_hi = solve_at(beta_hi, &at_lo.contact);
  ++pin.solves;
  if (!at_hi.contact.contains(oi, oj))
    throw std::runtime_error(
        "pin_origin_to_fb: origin still active at the upper bracket end");

  const double width_goal = g.h() * g.h();
  while (pin.beta_hi - pin.beta_lo > width_goal) {
    const double mid = 0.5 * (pin.beta_lo + pin.beta_hi);
    ObstacleSolution at_mid = solve_at(mid, &at_hi.contact);
    ++pin.solves;
    if (at_mid.contact.contains(oi, oj)) {
      pin.beta_hi = mid;
      at_hi = std::move(at_mid);
    } else {
      pin.beta_lo = mid;
    }
  }

  pin.beta = pin.beta_hi;
  pin.origin_on_fb = at_hi.fb_cells.contains(oi, oj);
  pin.solution = std::move(at_hi);
  return pin;
}

}  // namespace oblab
