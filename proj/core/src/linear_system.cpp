#include "linear_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oblab {

namespace {

/// Column index touched by each stencil slot of row k on an n-wide grid.
inline long slot_column(long k, int n, int slot) {
  switch (slot) {
    case kC: return k;
    case kE: return k + 1;
    case kW: return k - 1;
    case kN: return k + n;
    case kS: return k - n;
    case kNE: return k + n + 1;
    case kNW: return k + n - 1;
    case kSE: return k - n + 1;
    case kSW: return k - n - 1;
    default: throw std::logic_error("slot_column: bad slot");
  }
}

}  // namespace

LinearSystem::LinearSystem(const StencilOperator& op) : op_(&op) {
  const Grid& g = op.grid;
  const int n = g.n_cells;
  const long size = g.size();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(size) * 9);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const long k = g.index(i, j);
      if (g.is_boundary(i, j)) {
        trips.emplace_back(k, k, 1.0);
      } else {
        for (int s = 0; s < 9; ++s) trips.emplace_back(k, slot_column(k, n, s), 1.0);
      }
    }
  }
  mat_.resize(size, size);
  mat_.setFromTriplets(trips.begin(), trips.end());
  mat_.makeCompressed();

  // Locate every (row, slot) in the compressed value array once; later
  // factorizations only overwrite values, keeping the pattern fixed.
  const int* outer = mat_.outerIndexPtr();
  const int* inner = mat_.innerIndexPtr();
  auto find_pos = [&](long row, long col) {
    const int* lo = inner + outer[col];
    const int* hi = inner + outer[col + 1];
    const int* it = std::lower_bound(lo, hi, static_cast<int>(row));
    if (it == hi || *it != row) throw std::logic_error("LinearSystem: missing pattern entry");
    return static_cast<int>(it - inner);
  };
  pos_.assign(static_cast<std::size_t>(size), {});
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const long k = g.index(i, j);
      if (g.is_boundary(i, j)) {
        pos_[k][kC] = find_pos(k, k);
      } else {
        for (int s = 0; s < 9; ++s) pos_[k][s] = find_pos(k, slot_column(k, n, s));
      }
    }
  }

  lu_.analyzePattern(mat_);
}

void LinearSystem::factorize(const std::vector<std::uint8_t>& identity_row,
                             const std::vector<double>* diag_shift) {
  const Grid& g = op_->grid;
  const long size = g.size();
  if (static_cast<long>(identity_row.size()) != size)
    throw std::invalid_argument("factorize: identity mask has wrong size");
  if (diag_shift && static_cast<long>(diag_shift->size()) != size)
    throw std::invalid_argument("factorize: diagonal shift has wrong size");

  double* vals = mat_.valuePtr();
  const int n = g.n_cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const long k = g.index(i, j);
      if (g.is_boundary(i, j)) {
        vals[pos_[k][kC]] = 1.0;
        continue;
      }
      if (identity_row[k]) {
        vals[pos_[k][kC]] = 1.0;
        for (int s = 1; s < 9; ++s) vals[pos_[k][s]] = 0.0;
        continue;
      }
      const std::array<double, 9>& row = op_->weights[k];
      vals[pos_[k][kC]] = row[kC] + (diag_shift ? (*diag_shift)[k] : 0.0);
      for (int s = 1; s < 9; ++s) vals[pos_[k][s]] = row[s];
    }
  }

  lu_.factorize(mat_);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("LinearSystem: sparse LU factorization failed");
  factorized_ = true;
}

std::vector<double> LinearSystem::solve(const std::vector<double>& rhs) const {
  if (!factorized_) throw std::logic_error("LinearSystem::solve before factorize");
  if (static_cast<long>(rhs.size()) != size())
    throw std::invalid_argument("solve: rhs has wrong size");
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::VectorXd x = lu_.solve(b);
  if (lu_.info() != Eigen::Success) throw std::runtime_error("LinearSystem: back-substitution failed");
  return std::vector<double>(x.data(), x.data() + x.size());
}

double LinearSystem::relative_residual(const std::vector<double>& x,
                                       const std::vector<double>& rhs) const {
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::Map<const Eigen::VectorXd> bv(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  const double denom = std::max(bv.norm(), 1e-300);
  return (mat_ * xv - bv).norm() / denom;
}

}  // namespace oblab
