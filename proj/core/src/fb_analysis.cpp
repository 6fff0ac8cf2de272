#include "oblab/fb_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oblab {

namespace {

/// Requires B_r(center) to sit inside the grid square.
void require_ball_inside(const Grid& g, const Point& center, double r, const char* what) {
  const Point o = g.origin();
  if (center[0] - r < o[0] || center[0] + r > o[0] + g.extent || center[1] - r < o[1] ||
      center[1] + r > o[1] + g.extent)
    throw std::invalid_argument(std::string(what) + ": ball leaves the grid");
}

/// Calls fn(i, j, k) for every cell whose center lies in B_r(center).
template <typename Fn>
void for_ball_cells(const Grid& g, const Point& center, double r, Fn&& fn) {
  const Point o = g.origin();
  const double h = g.h();
  const int n = g.n_cells;
  const int i_lo = std::max(0, static_cast<int>(std::floor((center[0] - r - o[0]) / h - 0.5)));
  const int i_hi = std::min(n - 1, static_cast<int>(std::ceil((center[0] + r - o[0]) / h - 0.5)));
  const int j_lo = std::max(0, static_cast<int>(std::floor((center[1] - r - o[1]) / h - 0.5)));
  const int j_hi = std::min(n - 1, static_cast<int>(std::ceil((center[1] + r - o[1]) / h - 0.5)));
  const double r2 = r * r;
  for (int j = j_lo; j <= j_hi; ++j) {
    for (int i = i_lo; i <= i_hi; ++i) {
      const Point c = g.cell_center(i, j);
      const double dx = c[0] - center[0], dy = c[1] - center[1];
      if (dx * dx + dy * dy < r2) fn(i, j, g.index(i, j));
    }
  }
}

}  // namespace

DensityProfile density_profile(const ObstacleSolution& sol, const Point& center,
                               const std::vector<double>& radii) {
  const Grid& g = sol.w.grid;
  if (radii.empty()) throw std::invalid_argument("density_profile: no radii");
  const double h = g.h();
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] >= 4.0 * h))
      throw std::invalid_argument("density_profile: radius below 4h is unreliable");
    if (k > 0 && !(radii[k] < radii[k - 1]))
      throw std::invalid_argument("density_profile: radii must be decreasing");
    require_ball_inside(g, center, radii[k], "density_profile");
  }

  DensityProfile profile;
  profile.center = center;
  profile.radii = radii;
  profile.g_values.reserve(radii.size());
  for (const double r : radii) {
    long total = 0, in_contact = 0;
    for_ball_cells(g, center, r, [&](int i, int j, long) {
      ++total;
      if (sol.contact.contains(i, j)) ++in_contact;
    });
    profile.g_values.push_back(total > 0 ? static_cast<double>(in_contact) / total : 0.0);
  }
  return profile;
}

ClassificationVerdict classify(const DensityProfile& profile, double eps, double r0, double tau) {
  if (!(eps > 0.0 && eps < 0.125))
    throw std::invalid_argument("classify: eps must lie in (0, 1/8)");
  if (!(r0 > 0.0)) throw std::invalid_argument("classify: r0 must be positive");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("classify: tau must lie in (0, 1]");

  ClassificationVerdict verdict;
  verdict.eps = eps;
  verdict.r0 = r0;
  verdict.tau = tau;

  const std::size_t m = profile.radii.size();
  for (std::size_t a = 0; a < m; ++a) {
    const double t = profile.radii[a];
    if (t > r0 || profile.g_values[a] < eps) continue;
    bool all_above = true;
    bool any_tested = false;
    for (std::size_t b = 0; b < m; ++b) {
      if (profile.radii[b] > tau * t) continue;
      any_tested = true;
      if (profile.g_values[b] < 0.5 - eps) {
        all_above = false;
        break;
      }
    }
    if (any_tested && all_above) {
      verdict.verdict = Verdict::Regular;
      verdict.witness_t = t;
      return verdict;
    }
  }

  bool any_small = false;
  bool all_below = true;
  for (std::size_t b = 0; b < m; ++b) {
    if (profile.radii[b] > r0) continue;
    any_small = true;
    if (profile.g_values[b] > eps) {
      all_below = false;
      break;
    }
  }
  verdict.verdict = (any_small && all_below) ? Verdict::Singular : Verdict::Undetermined;
  return verdict;
}

double minimum_diameter(const CellSet& cells, const Ball& window) {
  const Grid& g = cells.grid;
  std::vector<Point> pts;
  const int n = g.n_cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (cells.contains(i, j)) {
        const Point c = g.cell_center(i, j);
        if (window.contains(c)) pts.push_back(c);
      }
  if (pts.empty()) return 0.0;

  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 180; ++k) {
    const double theta = k * std::numbers::pi / 180.0;
    const double cx = std::cos(theta), cy = std::sin(theta);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Point& p : pts) {
      const double t = p[0] * cx + p[1] * cy;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    best = std::min(best, hi - lo);
  }
  return best + g.h();
}

double symmetric_difference_measure(const CellSet& s1, const CellSet& s2, const Ball& window) {
  const Grid& g = s1.grid;
  if (!g.same_as(s2.grid))
    throw std::invalid_argument("symmetric_difference_measure: sets live on different grids");
  long count = 0;
  for_ball_cells(g, window.center, window.radius, [&](int i, int j, long) {
    if (s1.contains(i, j) != s2.contains(i, j)) ++count;
  });
  return count * g.h() * g.h();
}

long NondegeneracyReport::violations() const {
  long v = 0;
  for (const NondegeneracyRow& row : rows)
    if (row.violated) ++v;
  return v;
}

NondegeneracyReport nondegeneracy_report(const ObstacleSolution& sol, const StencilOperator& op,
                                         const std::vector<Point>& centers,
                                         const std::vector<double>& radii) {
  const Grid& g = sol.w.grid;
  if (!g.same_as(op.grid)) throw std::invalid_argument("nondegeneracy_report: grid mismatch");
  const double h = g.h();
  const Point o = g.origin();
  const int n = g.n_cells;

  for (const Point& c : centers) {
    const int ci = static_cast<int>(std::floor((c[0] - o[0]) / h));
    const int cj = static_cast<int>(std::floor((c[1] - o[1]) / h));
    if (ci < 0 || cj < 0 || ci >= n || cj >= n)
      throw std::invalid_argument("nondegeneracy_report: center outside the grid");
    bool near_active = false;
    for (int dj = -1; dj <= 1 && !near_active; ++dj)
      for (int di = -1; di <= 1 && !near_active; ++di) {
        const int ii = ci + di, jj = cj + dj;
        if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
        near_active = sol.active.contains(ii, jj);
      }
    if (!near_active)
      throw std::invalid_argument(
          "nondegeneracy_report: center not in the closure of the active set");
  }

  NondegeneracyReport report;
  for (const Point& c : centers) {
    for (const double r : radii) {
      if (!(r >= 8.0 * h))
        throw std::invalid_argument("nondegeneracy_report: radius below 8h");
      require_ball_inside(g, c, r, "nondegeneracy_report");
      double sup_w = 0.0;
      double max_entry = 0.0;
      for_ball_cells(g, c, r, [&](int i, int j, long k) {
        sup_w = std::max(sup_w, sol.w.values[k]);
        max_entry = std::max(max_entry, op.coeffs.at(i, j).max_abs_entry());
      });
      NondegeneracyRow row;
      row.center = c;
      row.r = r;
      row.sup_w = sup_w;
      row.required = r * r / (4.0 * max_entry);
      row.margin = sup_w - row.required;
      row.violated = sup_w < row.required - h;
      report.rows.push_back(row);
    }
  }
  return report;
}

double discrete_sobolev_norm(const ScalarField& field, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("discrete_sobolev_norm: p must lie in [1, inf)");
  const Grid& g = field.grid;
  const int n = g.n_cells;
  const double h = g.h();

  // First differences: central inside, one-sided on the ring (exact on
  // affine fields everywhere). Second differences by composing the same rule.
  auto dx = [&](const std::vector<double>& v, int i, int j) {
    const long k = g.index(i, j);
    if (i == 0) return (v[k + 1] - v[k]) / h;
    if (i == n - 1) return (v[k] - v[k - 1]) / h;
    return (v[k + 1] - v[k - 1]) / (2.0 * h);
  };
  auto dy = [&](const std::vector<double>& v, int i, int j) {
    const long k = g.index(i, j);
    if (j == 0) return (v[k + n] - v[k]) / h;
    if (j == n - 1) return (v[k] - v[k - n]) / h;
    return (v[k + n] - v[k - n]) / (2.0 * h);
  };

  std::vector<double> gx(static_cast<std::size_t>(g.size()));
  std::vector<double> gy(static_cast<std::size_t>(g.size()));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const long k = g.index(i, j);
      gx[k] = dx(field.values, i, j);
      gy[k] = dy(field.values, i, j);
    }

  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const long k = g.index(i, j);
      const double grad = std::hypot(gx[k], gy[k]);
      const double hxx = dx(gx, i, j);
      const double hyy = dy(gy, i, j);
      const double hxy = 0.5 * (dy(gx, i, j) + dx(gy, i, j));
      const double hess = std::sqrt(hxx * hxx + 2.0 * hxy * hxy + hyy * hyy);
      sum += (std::pow(std::abs(field.values[k]), p) + std::pow(grad, p) + std::pow(hess, p)) *
             h * h;
    }
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace oblab
