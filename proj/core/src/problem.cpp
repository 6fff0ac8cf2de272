#include "oblab/problem.hpp"

#include <stdexcept>

namespace oblab {

ObstacleSolution solve(const ObstacleProblem& problem, double tol,
                       const CellSet* warm_start_contact) {
  if (!problem.grid.same_as(problem.coeffs.grid) || !problem.grid.same_as(problem.psi.grid))
    throw std::invalid_argument("solve: problem pieces live on different grids");
  const StencilOperator op = assemble(problem.coeffs);
  return solve_obstacle(op, problem.psi, tol, warm_start_contact);
}

}  // namespace oblab
