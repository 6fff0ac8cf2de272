#include "oblab/stencil.hpp"

#include <algorithm>
#include <cmath>

namespace oblab {

StencilOperator assemble(const CoefficientField& coeffs) {
  const Grid& g = coeffs.grid;
  StencilOperator op{g, coeffs, {}};
  op.weights.assign(g.size(), std::array<double, 9>{});

  const double inv_h2 = 1.0 / (g.h() * g.h());
  const int n = g.n_cells;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const SymMatrix2 a = coeffs.at(i, j);
      const double s = std::abs(a.a12);
      std::array<double, 9>& w = op.weights[g.index(i, j)];
      w[kE] = w[kW] = (a.a11 - s) * inv_h2;
      w[kN] = w[kS] = (a.a22 - s) * inv_h2;
      const double pos = std::max(a.a12, 0.0) * inv_h2;
      const double neg = std::max(-a.a12, 0.0) * inv_h2;
      w[kNE] = w[kSW] = pos;
      w[kNW] = w[kSE] = neg;
      w[kC] = -2.0 * (a.a11 + a.a22 - s) * inv_h2;
    }
  }
  return op;
}

ScalarField apply(const StencilOperator& op, const ScalarField& w) {
  const Grid& g = op.grid;
  if (!g.same_as(w.grid)) throw std::invalid_argument("apply: field lives on a different grid");
  ScalarField out = ScalarField::zeros(g);
  const int n = g.n_cells;
  const double* v = w.values.data();
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const long k = g.index(i, j);
      const std::array<double, 9>& row = op.weights[k];
      out.values[k] = row[kC] * v[k] + row[kE] * v[k + 1] + row[kW] * v[k - 1] +
                      row[kN] * v[k + n] + row[kS] * v[k - n] + row[kNE] * v[k + n + 1] +
                      row[kNW] * v[k + n - 1] + row[kSE] * v[k - n + 1] +
                      row[kSW] * v[k - n - 1];
    }
  }
  return out;
}

MonotonicityReport monotonicity_report(const StencilOperator& op) {
  MonotonicityReport rep;
  const Grid& g = op.grid;
  const int n = g.n_cells;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const std::array<double, 9>& row = op.weights[g.index(i, j)];
      if (!(row[kC] < 0.0)) {
        ++rep.violation_count;
        rep.worst_magnitude = std::max(rep.worst_magnitude, std::abs(row[kC]));
      }
      for (int d = 1; d < 9; ++d) {
        if (row[d] < 0.0) {
          ++rep.violation_count;
          rep.worst_magnitude = std::max(rep.worst_magnitude, -row[d]);
        }
      }
    }
  }
  return rep;
}

}  // namespace oblab
