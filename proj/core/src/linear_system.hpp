#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "oblab/stencil.hpp"

namespace oblab {

/// Sparse direct solver for systems whose rows are either a 9-point stencil
/// row or an identity row (Dirichlet ring, contact cells, frozen unknowns).
///
/// The sparsity pattern never changes across policies: interior rows always
/// carry their 9 entries (an identity row just writes 1 at the center and 0
/// elsewhere), so the symbolic analysis runs once and only the numeric
/// factorization is repeated.
class LinearSystem {
 public:
  explicit LinearSystem(const StencilOperator& op);

  /// Rebuilds the numeric values and refactorizes.
  /// identity_row[k] != 0 forces row k to "w_k = rhs_k"; boundary-ring rows
  /// are always identity regardless of the mask. diag_shift, if given, is
  /// added to the center weight of every remaining stencil row.
  void factorize(const std::vector<std::uint8_t>& identity_row,
                 const std::vector<double>* diag_shift = nullptr);

  std::vector<double> solve(const std::vector<double>& rhs) const;

  /// ||A x - b||_2 / max(||b||_2, 1e-300) for the last factorized values.
  double relative_residual(const std::vector<double>& x, const std::vector<double>& rhs) const;

  long size() const { return static_cast<long>(op_->grid.size()); }

 private:
  const StencilOperator* op_;
  Eigen::SparseMatrix<double> mat_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  /// Value-array position of each (row, stencil slot); ring rows use slot kC.
  std::vector<std::array<int, 9>> pos_;
  bool factorized_ = false;
};

}  // namespace oblab
