#pragma once

#include <vector>

#include "oblab/grid.hpp"
#include "oblab/problem.hpp"
#include "oblab/stencil.hpp"

namespace oblab {

/// Monotone C^2 ramp from 0 to 1 over [0, eps]: the quintic smoothstep
/// 6t^5 - 15t^4 + 10t^3 applied to t/eps and clamped outside [0, 1].
/// Smooths the characteristic function chi_{w>0} for the semilinear solver.
struct PenaltyRamp {
  double eps = 0.0;

  double value(double t) const;
  double derivative(double t) const;
};

/// Ramp evaluation; always in [0, 1], zero for t <= 0, one for t >= eps.
double penalty_value(const PenaltyRamp& ramp, double t);

struct SemilinearResult {
  ScalarField u;
  bool converged = false;
  /// Newton iterations summed over all continuation stages.
  int newton_iterations = 0;
  /// max |L u - t ramp(u)| over interior cells at the last completed stage.
  double residual = 0.0;
  /// Largest continuation parameter whose stage converged (1 on success).
  double last_converged_t = 0.0;
};

/// Solves L u = t * ramp(u) with u = psi_eps on the ring by continuation in
/// t over {1/t_steps, ..., 1}. Each stage runs damped Newton on the
/// linearization L v - t ramp'(u) v, warm-started from the previous stage;
/// steps are halved (at most 6 times) whenever the residual would grow.
/// If a stage fails to converge, the last convergent stage is returned with
/// converged = false.
SemilinearResult solve_semilinear(const StencilOperator& op_eps, const ScalarField& psi_eps,
                                  const PenaltyRamp& ramp, int t_steps, double tol);

struct PathEntry {
  double eps = 0.0;
  ScalarField u;
  /// Max-norm distance to the complementarity solution of the same problem.
  double distance_to_oracle = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Penalization path: for each eps (strictly decreasing, min >= h^2),
/// mollify the coefficients at radius max(eps, h), mollify the Dirichlet data
/// along the ring, solve the semilinear problem, and record the distance to
/// the unsmoothed complementarity solution. Per-eps solver failures are
/// recorded in the entry rather than aborting the path.
std::vector<PathEntry> penalized_path(const ObstacleProblem& problem,
                                      const std::vector<double>& eps_list, double tol,
                                      int t_steps = 10);

}  // namespace oblab
