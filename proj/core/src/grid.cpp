#include "oblab/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oblab {

Grid build_grid(double extent, int n_cells, Point center) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw std::invalid_argument("build_grid: extent must be positive, got " +
                                std::to_string(extent));
  }
  if (n_cells < 8) {
    throw std::invalid_argument("build_grid: n_cells must be at least 8, got " +
                                std::to_string(n_cells));
  }
  if (!std::isfinite(center[0]) || !std::isfinite(center[1])) {
    throw std::invalid_argument("build_grid: center must be finite");
  }
  return Grid{extent, n_cells, center};
}

ScalarField ScalarField::from_function(const Grid& g,
                                       const std::function<double(Point)>& f) {
  ScalarField out = ScalarField::zeros(g);
  for (int j = 0; j < g.n_cells; ++j) {
    for (int i = 0; i < g.n_cells; ++i) {
      out.values[g.index(i, j)] = f(g.cell_center(i, j));
    }
  }
  require_finite(out, "from_function");
  return out;
}

void require_finite(const ScalarField& f, const char* what) {
  for (double v : f.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) +
                                ": field contains a non-finite value");
    }
  }
}

double sample(const ScalarField& field, const Point& p) {
  const Grid& g = field.grid;
  if (!g.in_hull(p)) {
    throw std::invalid_argument("sample: point outside the cell-center hull");
  }
  const Point o = g.origin();
  const double h = g.h();
  // Continuous cell-center coordinates; clamp so exact hull-edge points
  // resolve to the last full cell pair.
  double u = (p[0] - o[0]) / h - 0.5;
  double v = (p[1] - o[1]) / h - 0.5;
  int i0 = static_cast<int>(std::floor(u));
  int j0 = static_cast<int>(std::floor(v));
  i0 = std::max(0, std::min(i0, g.n_cells - 2));
  j0 = std::max(0, std::min(j0, g.n_cells - 2));
  const double s = u - i0;
  const double t = v - j0;
  const double f00 = field.at(i0, j0), f10 = field.at(i0 + 1, j0);
  const double f01 = field.at(i0, j0 + 1), f11 = field.at(i0 + 1, j0 + 1);
  return (1 - s) * (1 - t) * f00 + s * (1 - t) * f10 + (1 - s) * t * f01 +
         s * t * f11;
}

long CellSet::count() const {
  long c = 0;
  for (std::uint8_t m : mask) c += (m != 0);
  return c;
}

CellSet ball_cells(const Grid& grid, const Point& center, double r) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("ball_cells: radius must be positive");
  }
  CellSet out = CellSet::empty(grid);
  const double r2 = r * r;
  for (int j = 0; j < grid.n_cells; ++j) {
    for (int i = 0; i < grid.n_cells; ++i) {
      const Point c = grid.cell_center(i, j);
      const double dx = c[0] - center[0], dy = c[1] - center[1];
      if (dx * dx + dy * dy < r2) out.mask[grid.index(i, j)] = 1;
    }
  }
  return out;
}

}  // namespace oblab
