#pragma once

#include <limits>
#include <string>
#include <vector>

#include "oblab/grid.hpp"
#include "oblab/stencil.hpp"

namespace oblab {

struct SolveDiagnostics {
  /// Outer (policy) iterations consumed.
  int policies = 0;
  /// Final complementarity residual max |min(1 - Lw, w)| over interior cells.
  double residual = std::numeric_limits<double>::quiet_NaN();
  /// Relative residual of the last inner linear solve.
  double linear_residual = 0.0;
  bool converged = false;
  MonotonicityReport monotonicity;
};

/// Solution of the discrete obstacle problem
///   L w = 1 on the active set, w = 0 on the contact set, w = psi on the ring,
/// equivalently the complementarity system min(1 - L w, w) = 0.
struct ObstacleSolution {
  ScalarField w;
  /// Interior cells where the PDE branch L w = 1 holds (the positivity set).
  CellSet active;
  /// Interior cells where w = 0 (the zero set).
  CellSet contact;
  /// Contact cells with at least one active 8-neighbor: the discrete free
  /// boundary seen from the contact side.
  CellSet fb_cells;
  SolveDiagnostics diagnostics;
};

/// Policy iteration for the complementarity system.
///
/// Each policy assigns every interior cell to the PDE branch or the
/// constraint branch; one sparse solve per policy, then every cell switches
/// to the branch with the smaller local residual. Cells where both branch
/// residuals are below 1e-14 keep their current branch (anti-cycling).
/// The initial policy puts all interior cells on the PDE branch unless
/// warm_start_contact supplies a starting contact set.
///
/// psi must be nonnegative on the Dirichlet ring and tol positive. If the
/// policy has not stabilized after 200 solves, the best iterate found is
/// returned with diagnostics.converged = false.
ObstacleSolution solve_obstacle(const StencilOperator& op, const ScalarField& psi, double tol,
                                const CellSet* warm_start_contact = nullptr);

/// max over interior cells of |min(1 - L w, w)| for an arbitrary field
/// carried by sol.w; zero exactly when w solves the discrete system.
double complementarity_residual(const ObstacleSolution& sol, const StencilOperator& op);

/// Persists a solution as <prefix>_w.field, <prefix>_{active,contact,fb}.cells
/// and <prefix>_diagnostics.json. Returns the written paths.
std::vector<std::string> write_solution(const ObstacleSolution& sol, const std::string& prefix,
                                        const std::string& coefficient_descriptor);

}  // namespace oblab
