#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

namespace oblab {

using Point = std::array<double, 2>;

/// Open ball used as a measurement window.
struct Ball {
  Point center{0.0, 0.0};
  double radius = 0.0;

  bool contains(const Point& p) const {
    const double dx = p[0] - center[0], dy = p[1] - center[1];
    return dx * dx + dy * dy < radius * radius;
  }
};

/// Uniform cell-centered lattice over an axis-aligned square.
///
/// Cells are enumerated row-major: index = j * n_cells + i, where i runs
/// along the first axis. Cell (i, j) has its center at
/// origin + ((i + 1/2) h, (j + 1/2) h). The outermost one-cell ring is the
/// Dirichlet layer; everything else is interior.
struct Grid {
  double extent = 0.0;
  int n_cells = 0;
  Point center{0.0, 0.0};

  double h() const { return extent / n_cells; }
  int size() const { return n_cells * n_cells; }
  int index(int i, int j) const { return j * n_cells + i; }

  Point origin() const {
    return {center[0] - 0.5 * extent, center[1] - 0.5 * extent};
  }

  Point cell_center(int i, int j) const {
    const Point o = origin();
    const double hh = h();
    return {o[0] + (i + 0.5) * hh, o[1] + (j + 0.5) * hh};
  }

  bool is_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == n_cells - 1 || j == n_cells - 1;
  }

  /// True if p lies inside the convex hull of the cell centers, the region
  /// where bilinear interpolation is defined.
  bool in_hull(const Point& p) const {
    const Point o = origin();
    const double hh = h();
    const double lo0 = o[0] + 0.5 * hh, hi0 = o[0] + extent - 0.5 * hh;
    const double lo1 = o[1] + 0.5 * hh, hi1 = o[1] + extent - 0.5 * hh;
    return p[0] >= lo0 && p[0] <= hi0 && p[1] >= lo1 && p[1] <= hi1;
  }

  bool same_as(const Grid& g) const {
    return extent == g.extent && n_cells == g.n_cells && center == g.center;
  }
};

/// Validates and constructs a grid. Rejects n_cells < 8 and extent <= 0.
Grid build_grid(double extent, int n_cells, Point center = {0.0, 0.0});

/// One real value per cell, row-major. Values must stay finite; every public
/// operation that produces a field checks this.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  double& at(int i, int j) { return values[grid.index(i, j)]; }
  double at(int i, int j) const { return values[grid.index(i, j)]; }

  static ScalarField zeros(const Grid& g) {
    return {g, std::vector<double>(static_cast<size_t>(g.size()), 0.0)};
  }
  static ScalarField constant(const Grid& g, double c) {
    return {g, std::vector<double>(static_cast<size_t>(g.size()), c)};
  }
  /// Evaluates f at every cell center.
  static ScalarField from_function(const Grid& g,
                                   const std::function<double(Point)>& f);
};

/// Throws if any value is NaN or infinite.
void require_finite(const ScalarField& f, const char* what);

/// Bilinear interpolation from the four cell centers surrounding p.
/// Exact on affine functions. p must lie inside the cell-center hull.
double sample(const ScalarField& field, const Point& p);

/// Boolean mask over the cells of a grid.
struct CellSet {
  Grid grid;
  std::vector<std::uint8_t> mask;

  bool contains(int i, int j) const { return mask[grid.index(i, j)] != 0; }
  void set(int i, int j, bool v) { mask[grid.index(i, j)] = v ? 1 : 0; }
  long count() const;

  static CellSet empty(const Grid& g) {
    return {g, std::vector<std::uint8_t>(static_cast<size_t>(g.size()), 0)};
  }
};

/// Cells whose centers lie strictly inside the open ball B_r(center).
CellSet ball_cells(const Grid& grid, const Point& center, double r);

}  // namespace oblab
