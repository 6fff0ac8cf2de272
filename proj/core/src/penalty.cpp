#include "oblab/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "linear_system.hpp"
#include "oblab/obstacle.hpp"

namespace oblab {

double PenaltyRamp::value(double t) const {
  if (!(eps > 0.0)) throw std::invalid_argument("PenaltyRamp: width must be positive");
  const double tau = t / eps;
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  return ((6.0 * tau - 15.0) * tau + 10.0) * tau * tau * tau;
}

double PenaltyRamp::derivative(double t) const {
  if (!(eps > 0.0)) throw std::invalid_argument("PenaltyRamp: width must be positive");
  const double tau = t / eps;
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  const double edge = tau * (tau - 1.0);
  return 30.0 * edge * edge / eps;
}

double penalty_value(const PenaltyRamp& ramp, double t) { return ramp.value(t); }

namespace {

constexpr int kMaxNewtonPerStage = 50;
constexpr int kMaxHalvings = 6;

double interior_residual(const Grid& g, const StencilOperator& op, const ScalarField& u,
                         const PenaltyRamp& ramp, double t, std::vector<double>* out) {
  const ScalarField lu = apply(op, u);
  const int n = g.n_cells;
  double worst = 0.0;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const long k = g.index(i, j);
      const double f = lu.values[k] - t * ramp.value(u.values[k]);
      if (out) (*out)[k] = f;
      worst = std::max(worst, std::abs(f));
    }
  }
  return worst;
}

}  // namespace

SemilinearResult solve_semilinear(const StencilOperator& op_eps, const ScalarField& psi_eps,
                                  const PenaltyRamp& ramp, int t_steps, double tol) {
  const Grid& g = op_eps.grid;
  if (!g.same_as(psi_eps.grid))
    throw std::invalid_argument("solve_semilinear: boundary data lives on a different grid");
  if (t_steps < 1) throw std::invalid_argument("solve_semilinear: need at least one stage");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_semilinear: tolerance must be positive");
  require_finite(psi_eps, "solve_semilinear boundary data");
  const int n = g.n_cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (g.is_boundary(i, j) && psi_eps.at(i, j) < 0.0)
        throw std::invalid_argument("solve_semilinear: boundary data must be nonnegative");

  const long size = g.size();
  LinearSystem system(op_eps);
  const std::vector<std::uint8_t> no_extra_identity(static_cast<std::size_t>(size), 0);

  // Starting point: the linear problem L u = 0 with the given ring data.
  std::vector<double> rhs(static_cast<std::size_t>(size), 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (g.is_boundary(i, j)) rhs[g.index(i, j)] = psi_eps.at(i, j);
  system.factorize(no_extra_identity);
  ScalarField u{g, system.solve(rhs)};
  require_finite(u, "solve_semilinear start");

  SemilinearResult result;
  result.u = u;
  std::vector<double> f(static_cast<std::size_t>(size), 0.0);
  std::vector<double> shift(static_cast<std::size_t>(size), 0.0);

  for (int stage = 1; stage <= t_steps; ++stage) {
    const double t = static_cast<double>(stage) / t_steps;
    double residual = interior_residual(g, op_eps, u, ramp, t, &f);
    bool stage_ok = residual <= tol;
    int iter = 0;
    while (!stage_ok && iter < kMaxNewtonPerStage) {
      ++iter;
      ++result.newton_iterations;
      for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
          const long k = g.index(i, j);
          shift[k] = -t * ramp.derivative(u.values[k]);
        }
      system.factorize(no_extra_identity, &shift);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const long k = g.index(i, j);
          rhs[k] = g.is_boundary(i, j) ? 0.0 : -f[k];
        }
      const std::vector<double> delta = system.solve(rhs);

      double alpha = 1.0;
      ScalarField trial = u;
      double trial_residual = residual;
      for (int halving = 0; halving <= kMaxHalvings; ++halving) {
        for (long k = 0; k < size; ++k) trial.values[k] = u.values[k] + alpha * delta[k];
        trial_residual = interior_residual(g, op_eps, trial, ramp, t, nullptr);
        if (trial_residual < residual) break;
        alpha *= 0.5;
      }
      u = trial;
      require_finite(u, "solve_semilinear iterate");
      residual = interior_residual(g, op_eps, u, ramp, t, &f);
      stage_ok = residual <= tol;
    }

    if (!stage_ok) {
      result.converged = false;
      return result;  // last convergent stage already stored
    }
    result.u = u;
    result.residual = residual;
    result.last_converged_t = t;
  }
  result.converged = true;
  return result;
}

std::vector<PathEntry> penalized_path(const ObstacleProblem& problem,
                                      const std::vector<double>& eps_list, double tol,
                                      int t_steps) {
  if (eps_list.empty()) throw std::invalid_argument("penalized_path: empty ramp-width list");
  if (t_steps < 1) throw std::invalid_argument("penalized_path: t_steps must be at least 1");
  const double h = problem.grid.h();
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] >= h * h))
      throw std::invalid_argument("penalized_path: ramp width below h^2");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("penalized_path: ramp widths must be strictly decreasing");
  }

  const ObstacleSolution oracle = solve(problem, tol);
  const Grid& g = problem.grid;
  const int n = g.n_cells;

  std::vector<PathEntry> path;
  path.reserve(eps_list.size());
  for (const double eps : eps_list) {
    const double radius = std::max(eps, h);
    const CoefficientField coeffs_eps = mollify(problem.coeffs, radius);
    // Dirichlet data is smoothed along the ring only; interior values of psi
    // never enter the solve.
    const ScalarField psi_smooth = mollify(problem.psi, radius);
    ScalarField psi_eps = problem.psi;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (g.is_boundary(i, j)) psi_eps.at(i, j) = std::max(0.0, psi_smooth.at(i, j));

    const StencilOperator op_eps = assemble(coeffs_eps);
    const SemilinearResult run =
        solve_semilinear(op_eps, psi_eps, PenaltyRamp{eps}, t_steps, tol);

    PathEntry entry;
    entry.eps = eps;
    entry.u = run.u;
    entry.residual = run.residual;
    entry.iterations = run.newton_iterations;
    entry.converged = run.converged;
    double dist = 0.0;
    for (long k = 0; k < g.size(); ++k)
      dist = std::max(dist, std::abs(run.u.values[k] - oracle.w.values[k]));
    entry.distance_to_oracle = dist;
    path.push_back(std::move(entry));
  }
  return path;
}

}  // namespace oblab
