#include "oblab/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "linear_system.hpp"
#include "oblab/io.hpp"

namespace oblab {

namespace {

constexpr int kMaxPolicies = 200;
/// Cells whose PDE and constraint residuals are both below this keep their
/// branch; prevents cycling on exactly-degenerate free-boundary cells.
constexpr double kTieTolerance = 1e-14;

CellSet mask_to_cells(const Grid& g, const std::vector<std::uint8_t>& mask, bool value) {
  CellSet out = CellSet::empty(g);
  const int n = g.n_cells;
  for (int j = 1; j < n - 1; ++j)
    for (int i = 1; i < n - 1; ++i)
      if ((mask[g.index(i, j)] != 0) == value) out.set(i, j, true);
  return out;
}

CellSet fb_from_masks(const Grid& g, const CellSet& contact, const CellSet& active) {
  CellSet fb = CellSet::empty(g);
  const int n = g.n_cells;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      if (!contact.contains(i, j)) continue;
      bool touches_active = false;
      for (int dj = -1; dj <= 1 && !touches_active; ++dj)
        for (int di = -1; di <= 1 && !touches_active; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii <= 0 || jj <= 0 || ii >= n - 1 || jj >= n - 1) continue;
          touches_active = active.contains(ii, jj);
        }
      if (touches_active) fb.set(i, j, true);
    }
  }
  return fb;
}

}  // namespace

ObstacleSolution solve_obstacle(const StencilOperator& op, const ScalarField& psi, double tol,
                                const CellSet* warm_start_contact) {
  const Grid& g = op.grid;
  if (!g.same_as(psi.grid))
    throw std::invalid_argument("solve_obstacle: boundary data lives on a different grid");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_obstacle: tolerance must be positive");
  require_finite(psi, "solve_obstacle boundary data");

  const int n = g.n_cells;
  const long size = g.size();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (g.is_boundary(i, j) && psi.at(i, j) < 0.0)
        throw std::invalid_argument("solve_obstacle: boundary data must be nonnegative on the ring");

  std::vector<std::uint8_t> contact(static_cast<std::size_t>(size), 0);
  if (warm_start_contact) {
    if (!g.same_as(warm_start_contact->grid))
      throw std::invalid_argument("solve_obstacle: warm start lives on a different grid");
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i)
        contact[g.index(i, j)] = warm_start_contact->contains(i, j) ? 1 : 0;
  }

  LinearSystem system(op);
  std::vector<double> rhs(static_cast<std::size_t>(size), 0.0);

  ScalarField w = ScalarField::zeros(g);
  std::vector<std::uint8_t> best_contact = contact;
  ScalarField best_w = w;
  double best_residual = std::numeric_limits<double>::infinity();
  double best_linear_residual = 0.0;

  double residual = std::numeric_limits<double>::infinity();
  double linear_residual = 0.0;
  bool stable = false;
  int policies = 0;

  while (policies < kMaxPolicies) {
    ++policies;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const long k = g.index(i, j);
        if (g.is_boundary(i, j))
          rhs[k] = psi.values[k];
        else
          rhs[k] = contact[k] ? 0.0 : 1.0;
      }
    }
    system.factorize(contact);
    w.values = system.solve(rhs);
    require_finite(w, "solve_obstacle iterate");
    linear_residual = system.relative_residual(w.values, rhs);

    const ScalarField lw = apply(op, w);
    residual = 0.0;
    long flips = 0;
    std::vector<std::uint8_t> next = contact;
    for (int j = 1; j < n - 1; ++j) {
      for (int i = 1; i < n - 1; ++i) {
        const long k = g.index(i, j);
        const double pde_res = 1.0 - lw.values[k];
        const double con_res = w.values[k];
        residual = std::max(residual, std::abs(std::min(pde_res, con_res)));
        if (std::abs(con_res) <= kTieTolerance && std::abs(pde_res) <= kTieTolerance) continue;
        const std::uint8_t choose_contact = pde_res < con_res ? 0 : 1;
        if (choose_contact != contact[k]) {
          next[k] = choose_contact;
          ++flips;
        }
      }
    }

    if (residual < best_residual) {
      best_residual = residual;
      best_contact = contact;
      best_w = w;
      best_linear_residual = linear_residual;
    }
    if (flips == 0) {
      stable = true;
      break;
    }
    contact = std::move(next);
  }

  if (!stable) {
    contact = std::move(best_contact);
    w = std::move(best_w);
    residual = best_residual;
    linear_residual = best_linear_residual;
  }

  ObstacleSolution sol;
  sol.w = std::move(w);
  sol.contact = mask_to_cells(g, contact, true);
  sol.active = mask_to_cells(g, contact, false);
  sol.fb_cells = fb_from_masks(g, sol.contact, sol.active);
  sol.diagnostics.policies = policies;
  sol.diagnostics.residual = residual;
  sol.diagnostics.linear_residual = linear_residual;
  sol.diagnostics.converged = stable && residual <= tol;
  sol.diagnostics.monotonicity = monotonicity_report(op);
  return sol;
}

double complementarity_residual(const ObstacleSolution& sol, const StencilOperator& op) {
  const Grid& g = op.grid;
  if (!g.same_as(sol.w.grid))
    throw std::invalid_argument("complementarity_residual: grid mismatch");
  const ScalarField lw = apply(op, sol.w);
  const int n = g.n_cells;
  double residual = 0.0;
  for (int j = 1; j < n - 1; ++j) {
    for (int i = 1; i < n - 1; ++i) {
      const long k = g.index(i, j);
      residual = std::max(residual, std::abs(std::min(1.0 - lw.values[k], sol.w.values[k])));
    }
  }
  return residual;
}

std::vector<std::string> write_solution(const ObstacleSolution& sol, const std::string& prefix,
                                        const std::string& coefficient_descriptor) {
  std::vector<std::string> paths;
  paths.push_back(prefix + "_w.field");
  write_field(paths.back(), sol.w);
  paths.push_back(prefix + "_active.cells");
  write_cellset(paths.back(), sol.active);
  paths.push_back(prefix + "_contact.cells");
  write_cellset(paths.back(), sol.contact);
  paths.push_back(prefix + "_fb.cells");
  write_cellset(paths.back(), sol.fb_cells);

  nlohmann::json diag;
  diag["iterations"] = sol.diagnostics.policies;
  diag["residual"] = sol.diagnostics.residual;
  diag["linear_residual"] = sol.diagnostics.linear_residual;
  diag["converged"] = sol.diagnostics.converged;
  diag["h"] = sol.w.grid.h();
  diag["coefficients"] = coefficient_descriptor;
  diag["monotone_stencil"] = sol.diagnostics.monotonicity.monotone();
  diag["monotonicity_violations"] = sol.diagnostics.monotonicity.violation_count;
  paths.push_back(prefix + "_diagnostics.json");
  std::ofstream out(paths.back());
  if (!out) throw std::runtime_error("write_solution: cannot open " + paths.back());
  out << diag.dump(2) << "\n";
  return paths;
}

}  // namespace oblab
