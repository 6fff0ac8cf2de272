#pragma once

#include "oblab/coefficients.hpp"
#include "oblab/grid.hpp"
#include "oblab/obstacle.hpp"

namespace oblab {

/// A complete obstacle-problem instance: the grid, the coefficient matrices,
/// and the Dirichlet data. Only the ring values of psi enter the solve, but
/// psi is stored as a full field so analytic data can be compared against the
/// solution everywhere.
struct ObstacleProblem {
  Grid grid;
  CoefficientField coeffs;
  ScalarField psi;
};

/// Assembles the stencil and runs the complementarity solver in one call.
/// An optional warm-start contact mask (any grid-compatible CellSet) seeds the
/// initial policy; pass nullptr to start from the all-active policy.
ObstacleSolution solve(const ObstacleProblem& problem, double tol,
                       const CellSet* warm_start_contact = nullptr);

}  // namespace oblab
