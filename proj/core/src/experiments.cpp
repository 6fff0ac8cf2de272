#include "oblab/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "oblab/blowup.hpp"
#include "oblab/fb_analysis.hpp"
#include "oblab/io.hpp"
#include "oblab/obstacle.hpp"
#include "oblab/penalty.hpp"
#include "oblab/stencil.hpp"

namespace oblab {

namespace {

std::string fmt(double v) { return format_double(v); }

/// Max |a - b| over cells whose centers lie in the window.
double sup_distance_in_ball(const ScalarField& a, const ScalarField& b, const Ball& window) {
  if (!a.grid.same_as(b.grid))
    throw std::invalid_argument("sup_distance_in_ball: grid mismatch");
  const int n = a.grid.n_cells;
  double sup = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (!window.contains(a.grid.cell_center(i, j))) continue;
      sup = std::max(sup, std::abs(a.at(i, j) - b.at(i, j)));
    }
  return sup;
}

/// seq[k] <= (1 + slack) seq[k-1] for every k; detail lists the sequence.
std::pair<bool, std::string> non_increasing(const std::vector<double>& seq, double slack) {
  bool ok = true;
  std::string detail = "sequence";
  for (std::size_t k = 0; k < seq.size(); ++k) {
    detail += " " + fmt(seq[k]);
    if (k > 0 && !(seq[k] <= (1.0 + slack) * seq[k - 1])) ok = false;
  }
  return {ok, detail};
}

/// Signed area of {t1 <= x . nu <= t2} intersected with the disk of radius R
/// about the origin: integral of the chord length 2 sqrt(R^2 - t^2).
double disk_strip_area(double t1, double t2, double radius) {
  auto antiderivative = [radius](double t) {
    t = std::clamp(t, -radius, radius);
    return t * std::sqrt(radius * radius - t * t) +
           radius * radius * std::asin(t / radius);
  };
  return antiderivative(t2) - antiderivative(t1);
}

/// Cell indices of one set, row-major order (deterministic).
std::vector<std::array<int, 2>> cells_of(const CellSet& s) {
  std::vector<std::array<int, 2>> out;
  const int n = s.grid.n_cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (s.contains(i, j)) out.push_back({i, j});
  return out;
}

/// Center of mass of the cell centers of a set; empty -> grid center.
Point centroid(const CellSet& s) {
  const auto cells = cells_of(s);
  if (cells.empty()) return s.grid.center;
  double cx = 0.0, cy = 0.0;
  for (const auto& c : cells) {
    const Point p = s.grid.cell_center(c[0], c[1]);
    cx += p[0];
    cy += p[1];
  }
  return {cx / cells.size(), cy / cells.size()};
}

bool ball_inside_square(const Grid& g, const Point& center, double r) {
  const Point o = g.origin();
  return center[0] - r >= o[0] && center[0] + r <= o[0] + g.extent && center[1] - r >= o[1] &&
         center[1] + r <= o[1] + g.extent;
}

/// Dyadic radius ladder r_max, r_max/2, ... down to r_min (inclusive),
/// capped at 24 rungs.
std::vector<double> dyadic_ladder(double r_max, double r_min) {
  std::vector<double> radii;
  for (double r = r_max; r >= r_min && radii.size() < 24; r *= 0.5) radii.push_back(r);
  return radii;
}

/// Constant matrix modulated by a radial oscillation:
/// a(x) = A (1 + amplitude * u(|x|)) with u the profile rescaled to [-1, 1].
/// Rejects non-elliptic results (amplitude >= 1).
CoefficientField modulated_field(const Grid& grid, const SymMatrix2& A,
                                 const RadialProfile& profile, double amplitude) {
  if (!(amplitude >= 0.0 && amplitude < 1.0))
    throw std::invalid_argument("modulated_field: amplitude must lie in [0, 1)");
  const double mid = 0.5 * (profile.min_value() + profile.max_value());
  const double half = std::max(0.5 * (profile.max_value() - profile.min_value()), 1e-300);
  CoefficientField f;
  f.grid = grid;
  const int n = grid.n_cells;
  f.a11.resize(static_cast<std::size_t>(grid.size()));
  f.a12.resize(static_cast<std::size_t>(grid.size()));
  f.a22.resize(static_cast<std::size_t>(grid.size()));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point p = grid.cell_center(i, j);
      const double r = std::hypot(p[0], p[1]);
      const double u = (profile.value_at(r) - mid) / half;
      const double factor = 1.0 + amplitude * u;
      const int k = grid.index(i, j);
      f.a11[k] = A.a11 * factor;
      f.a12[k] = A.a12 * factor;
      f.a22[k] = A.a22 * factor;
    }
  f.lambda_lo = A.eig_min() * (1.0 - amplitude);
  f.lambda_hi = A.eig_max() * (1.0 + amplitude);
  const EllipticityReport rep = ellipticity_report(f);
  if (!rep.positive())
    throw std::invalid_argument("modulated_field: perturbation destroys ellipticity");
  return f;
}

/// Oscillation-phase radii exp(-exp((2k + parity) / s)) inside the
/// oscillating zone, descending, filtered to [r_min, r_max].
std::vector<double> phase_radii(double s, int junction_index, int parity, double r_min,
                                double r_max) {
  std::vector<double> radii;
  // The junction sits at exponent index m = junction_index; radii with
  // 2k + parity >= m lie inside the oscillating zone (r <= omega).
  int k = 0;
  while (2 * k + parity < junction_index) ++k;
  for (; radii.size() < 16; ++k) {
    const double r = std::exp(-std::exp((2.0 * k + parity) / s));
    if (r < r_min) break;
    if (r <= r_max) radii.push_back(r);
  }
  return radii;
}

/// Transfers a cell mask to another grid by nearest-cell lookup, used to seed
/// a refined solve from a coarse contact set.
CellSet resample_mask(const CellSet& src, const Grid& dst) {
  CellSet out = CellSet::empty(dst);
  const Point o = src.grid.origin();
  const double h_src = src.grid.h();
  for (int j = 0; j < dst.n_cells; ++j) {
    for (int i = 0; i < dst.n_cells; ++i) {
      const Point p = dst.cell_center(i, j);
      const int si = static_cast<int>(std::floor((p[0] - o[0]) / h_src));
      const int sj = static_cast<int>(std::floor((p[1] - o[1]) / h_src));
      if (si < 0 || sj < 0 || si >= src.grid.n_cells || sj >= src.grid.n_cells) continue;
      out.set(i, j, src.contains(si, sj));
    }
  }
  return out;
}

struct SubsequenceVerdict {
  bool any = false;
  bool matched_closer = true;
  double margin = 0.0;  ///< min over records of mismatched/matched distance.
};

SubsequenceVerdict judge_records(const std::vector<BlowupRecord>& records, std::size_t matched) {
  SubsequenceVerdict v;
  v.margin = std::numeric_limits<double>::infinity();
  for (const BlowupRecord& rec : records) {
    v.any = true;
    double mismatched = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rec.distances.size(); ++j)
      if (j != matched) mismatched = std::min(mismatched, rec.distances[j]);
    const double ratio = mismatched / std::max(rec.distances[matched], 1e-300);
    v.margin = std::min(v.margin, ratio);
    if (!(ratio > 1.0)) v.matched_closer = false;
  }
  if (!v.any) {
    v.matched_closer = false;
    v.margin = 0.0;
  }
  return v;
}

}  // namespace

bool ExperimentReport::all_pass() const {
  for (const Assertion& a : assertions)
    if (!a.pass) return false;
  return true;
}

void ExperimentReport::check(const std::string& name, bool pass, const std::string& detail) {
  assertions.push_back({name, pass, detail});
}

void ExperimentReport::add_scalar(const std::string& name, double value) {
  scalars.emplace_back(name, value);
}

double ExperimentReport::scalar(const std::string& name) const {
  for (const auto& [k, v] : scalars)
    if (k == name) return v;
  throw std::out_of_range("ExperimentReport: no scalar named " + name);
}

Grid make_grid(const GridConfig& gc) { return build_grid(gc.extent, gc.n_cells, gc.center); }

RadialProfile make_profile(const CoefficientConfig& cc) {
  if (cc.kind == "constant") return RadialProfile::constant(cc.a11);
  if (cc.kind == "counterexample")
    return counterexample_profile(counterexample_omega(cc.junction_index, cc.phase_speed),
                                  cc.phase_speed);
  if (cc.kind == "dyadic-step") return RadialProfile::dyadic_step(cc.value_a, cc.value_b);
  throw std::invalid_argument("unknown coefficient kind: " + cc.kind);
}

CoefficientField make_coefficients(const Grid& grid, const CoefficientConfig& cc) {
  if (cc.kind == "constant") return constant_field(grid, {cc.a11, cc.a12, cc.a22});
  return radial_scalar_field(grid, make_profile(cc));
}

SymMatrix2 halfspace_datum_matrix(const CoefficientConfig& cc, const BoundaryConfig& bc) {
  if (bc.datum_coefficient > 0.0)
    return {bc.datum_coefficient, 0.0, bc.datum_coefficient};
  if (cc.kind == "constant") return {cc.a11, cc.a12, cc.a22};
  const double outer = make_profile(cc).value_at(1.0);
  return {outer, 0.0, outer};
}

Point unit_normal(const BoundaryConfig& bc) {
  const double len = std::hypot(bc.nu_x, bc.nu_y);
  if (!(len > 0.0)) throw std::invalid_argument("boundary normal must be nonzero");
  return {bc.nu_x / len, bc.nu_y / len};
}

std::string coefficient_descriptor(const CoefficientConfig& cc) {
  if (cc.kind == "constant")
    return "constant a11=" + fmt(cc.a11) + " a12=" + fmt(cc.a12) + " a22=" + fmt(cc.a22);
  if (cc.kind == "counterexample")
    return "counterexample phase_speed=" + fmt(cc.phase_speed) +
           " junction_index=" + std::to_string(cc.junction_index);
  return "dyadic-step value_a=" + fmt(cc.value_a) + " value_b=" + fmt(cc.value_b);
}

ScalarField make_boundary_data(const Grid& grid, const CoefficientConfig& cc,
                               const BoundaryConfig& bc) {
  if (bc.kind == "halfspace")
    return halfspace_profile(halfspace_datum_matrix(cc, bc), unit_normal(bc), bc.beta, grid);
  if (bc.kind == "constant") return ScalarField::constant(grid, bc.value);
  if (bc.kind == "zero") return ScalarField::zeros(grid);
  throw std::invalid_argument("unknown boundary kind: " + bc.kind);
}

ObstacleProblem build_problem(const ExperimentConfig& cfg) {
  const Grid grid = make_grid(cfg.grid);
  return {grid, make_coefficients(grid, cfg.coefficients),
          make_boundary_data(grid, cfg.coefficients, cfg.boundary)};
}

ExperimentReport run_exact(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.coefficients.kind != "constant" || cfg.boundary.kind != "halfspace")
    throw std::invalid_argument(
        "exact experiment needs constant coefficients and half-space data (the closed-form "
        "oracle)");
  ExperimentReport report;
  report.experiment = "exact";
  const Point nu = unit_normal(cfg.boundary);

  struct Level {
    Grid grid;
    ScalarField truth;
    ObstacleSolution sol;
    double error = 0.0;
    double fb_offset = 0.0;
  };
  auto solve_level = [&](int n_cells, const CellSet* warm) {
    ExperimentConfig c = cfg;
    c.grid.n_cells = n_cells;
    Level lv{make_grid(c.grid), ScalarField{}, {}, 0.0, 0.0};
    const ObstacleProblem problem = build_problem(c);
    lv.truth = problem.psi;  // half-space data is the exact solution's trace everywhere
    lv.sol = solve(problem, cfg.solver.tol, warm);
    for (int k = 0; k < lv.grid.size(); ++k)
      lv.error = std::max(lv.error, std::abs(lv.sol.w.values[k] - lv.truth.values[k]));
    for (const auto& cell : cells_of(lv.sol.fb_cells)) {
      const Point p = lv.grid.cell_center(cell[0], cell[1]);
      lv.fb_offset = std::max(
          lv.fb_offset, std::abs(p[0] * nu[0] + p[1] * nu[1] - cfg.boundary.beta));
    }
    return lv;
  };

  const Level coarse = solve_level(cfg.grid.n_cells, nullptr);
  GridConfig fine_gc = cfg.grid;
  fine_gc.n_cells = 2 * cfg.grid.n_cells;
  const CellSet fine_warm = resample_mask(coarse.sol.contact, make_grid(fine_gc));
  const Level fine = solve_level(fine_gc.n_cells, &fine_warm);
  const double order =
      fine.error > 0.0 ? std::log2(coarse.error / fine.error) : 99.0;

  {
    CsvWriter csv(out_dir / "exact.csv", {"n_cells", "h", "max_error", "fb_offset"});
    csv.row({static_cast<double>(coarse.grid.n_cells), coarse.grid.h(), coarse.error,
             coarse.fb_offset});
    csv.row({static_cast<double>(fine.grid.n_cells), fine.grid.h(), fine.error, fine.fb_offset});
  }
  report.files.push_back(out_dir / "exact.csv");

  report.add_scalar("error_coarse", coarse.error);
  report.add_scalar("error_fine", fine.error);
  report.add_scalar("fb_offset_coarse", coarse.fb_offset);
  report.add_scalar("fb_offset_fine", fine.fb_offset);
  report.add_scalar("order", order);

  report.check("exact.solver_converged",
               coarse.sol.diagnostics.converged && fine.sol.diagnostics.converged,
               "policies " + std::to_string(coarse.sol.diagnostics.policies) + " and " +
                   std::to_string(fine.sol.diagnostics.policies));
  report.check("exact.error_bound",
               coarse.error <= 5.0 * coarse.grid.h() && fine.error <= 5.0 * fine.grid.h(),
               "errors " + fmt(coarse.error) + " vs 5h = " + fmt(5.0 * coarse.grid.h()) +
                   ", " + fmt(fine.error) + " vs " + fmt(5.0 * fine.grid.h()));
  const double one_cell = 1.0 + 1e-9;
  report.check("exact.fb_within_one_cell",
               coarse.sol.fb_cells.count() > 0 &&
                   coarse.fb_offset <= one_cell * coarse.grid.h() &&
                   fine.sol.fb_cells.count() > 0 && fine.fb_offset <= one_cell * fine.grid.h(),
               "offsets " + fmt(coarse.fb_offset) + " (h " + fmt(coarse.grid.h()) + "), " +
                   fmt(fine.fb_offset) + " (h " + fmt(fine.grid.h()) + ")");
  report.check("exact.convergence_order", order >= 1.0, "observed order " + fmt(order));

  if (cfg.output.write_fields) {
    const std::string descr = coefficient_descriptor(cfg.coefficients);
    for (const std::string& p :
         write_solution(coarse.sol, (out_dir / "exact_coarse").string(), descr))
      report.files.emplace_back(p);
    for (const std::string& p :
         write_solution(fine.sol, (out_dir / "exact_fine").string(), descr))
      report.files.emplace_back(p);
  }
  return report;
}

ExperimentReport run_stability(const ExperimentConfig& cfg,
                               const std::filesystem::path& out_dir) {
  if (cfg.coefficients.kind != "constant")
    throw std::invalid_argument("stability experiment needs a constant base matrix");
  ExperimentReport report;
  report.experiment = "stability";

  const Grid grid = make_grid(cfg.grid);
  const SymMatrix2 base{cfg.coefficients.a11, cfg.coefficients.a12, cfg.coefficients.a22};
  const ScalarField psi = make_boundary_data(grid, cfg.coefficients, cfg.boundary);

  // Seed the fine solve with the contact set of a half-resolution presolve;
  // the policy iteration then only has to correct a one-cell-wide band.
  CellSet base_warm = CellSet::empty(grid);
  const CellSet* base_warm_ptr = nullptr;
  if (cfg.grid.n_cells >= 64) {
    GridConfig half_gc = cfg.grid;
    half_gc.n_cells = cfg.grid.n_cells / 2;
    const Grid half = make_grid(half_gc);
    const ObstacleSolution half_sol =
        solve({half, constant_field(half, base), make_boundary_data(half, cfg.coefficients,
                                                                    cfg.boundary)},
              cfg.solver.tol);
    base_warm = resample_mask(half_sol.contact, grid);
    base_warm_ptr = &base_warm;
  }
  const ObstacleSolution base_sol = solve({grid, constant_field(grid, base), psi},
                                          cfg.solver.tol, base_warm_ptr);
  // Interior window: the closed-form prediction describes the one-dimensional
  // reduction, which holds away from the lateral walls (there the ring datum
  // pins the free boundary at its unperturbed height).
  const Ball window{grid.center, 0.25 * grid.extent};

  // The 1-D closed form applies when the problem reduces to one dimension:
  // half-space data with an axis-aligned normal annihilates the transverse
  // part of the stencil for any constant matrix.
  const Point nu = cfg.boundary.kind == "halfspace" ? unit_normal(cfg.boundary)
                                                    : Point{0.0, 1.0};
  const bool axis_aligned =
      std::abs(nu[0]) < 1e-12 || std::abs(nu[1]) < 1e-12;
  const bool predictable = cfg.boundary.kind == "halfspace" && axis_aligned;
  const double q_datum = halfspace_datum_matrix(cfg.coefficients, cfg.boundary).quad(nu);
  const double q_base = base.quad(nu);
  const double t_top = 0.5 * grid.extent + grid.center[0] * nu[0] + grid.center[1] * nu[1];
  const double beta = cfg.boundary.beta;

  bool all_converged = base_sol.diagnostics.converged;
  std::vector<double> symdiffs, supdists;
  CsvWriter csv(out_dir / "stability.csv",
                {"delta", "symdiff", "supdist", "predicted_symdiff", "predicted_beta"});
  CellSet prev_contact = base_sol.contact;
  for (std::size_t k = 0; k < cfg.stability.delta_list.size(); ++k) {
    const double delta = cfg.stability.delta_list[k];
    const SymMatrix2 perturbed{base.a11 * (1.0 + delta), base.a12 * (1.0 + delta),
                               base.a22 * (1.0 + delta)};
    const ObstacleSolution sol =
        solve({grid, constant_field(grid, perturbed), psi}, cfg.solver.tol, &prev_contact);
    prev_contact = sol.contact;
    all_converged = all_converged && sol.diagnostics.converged;

    const double symdiff = symmetric_difference_measure(sol.contact, base_sol.contact, window);
    const double supdist = sup_distance_in_ball(sol.w, base_sol.w, window);
    double predicted = std::numeric_limits<double>::quiet_NaN();
    double predicted_beta = std::numeric_limits<double>::quiet_NaN();
    if (predictable) {
      predicted_beta = t_top - (t_top - beta) * std::sqrt((1.0 + delta) * q_base / q_datum);
      const double t_center = grid.center[0] * nu[0] + grid.center[1] * nu[1];
      predicted = disk_strip_area(std::min(predicted_beta, beta) - t_center,
                                  std::max(predicted_beta, beta) - t_center, window.radius);
    }
    csv.row({delta, symdiff, supdist, predicted, predicted_beta});
    const std::string suffix = "_" + std::to_string(k);
    report.add_scalar("delta" + suffix, delta);
    report.add_scalar("symdiff" + suffix, symdiff);
    report.add_scalar("supdist" + suffix, supdist);
    report.add_scalar("predicted" + suffix, predicted);
    symdiffs.push_back(symdiff);
    supdists.push_back(supdist);
  }
  report.files.push_back(out_dir / "stability.csv");
  if (!predictable)
    report.notes.push_back("no 1-D reduction for this boundary data; predictions not available");

  report.check("stability.solver_converged", all_converged, "all solves converged");
  const auto [sym_ok, sym_detail] = non_increasing(symdiffs, 0.10);
  report.check("stability.symdiff_non_increasing", sym_ok, sym_detail);
  const auto [sup_ok, sup_detail] = non_increasing(supdists, 0.10);
  report.check("stability.supdist_non_increasing", sup_ok, sup_detail);
  return report;
}

ExperimentReport run_persistence(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir) {
  if (cfg.coefficients.kind != "constant")
    throw std::invalid_argument("persistence experiment needs a constant base matrix");
  ExperimentReport report;
  report.experiment = "persistence";

  const Grid grid = make_grid(cfg.grid);
  const SymMatrix2 base{cfg.coefficients.a11, cfg.coefficients.a12, cfg.coefficients.a22};
  const ScalarField psi = make_boundary_data(grid, cfg.coefficients, cfg.boundary);
  const RadialProfile modulation = counterexample_profile(
      counterexample_omega(cfg.coefficients.junction_index, cfg.coefficients.phase_speed),
      cfg.coefficients.phase_speed);

  std::vector<double> amplitudes = cfg.persistence.amplitude_list;
  if (std::find(amplitudes.begin(), amplitudes.end(), 0.0) == amplitudes.end()) {
    amplitudes.push_back(0.0);
    report.notes.push_back("amplitude 0 appended as control");
  }

  const std::vector<double> ladder = dyadic_ladder(cfg.classify.r0, 4.0 * grid.h());
  if (ladder.empty())
    throw std::invalid_argument("persistence: classification radii all under 4h; refine the grid");

  bool all_converged = true;
  bool zero_amp_regular = false;
  struct AmpRow {
    double amplitude;
    bool all_regular;
  };
  std::vector<AmpRow> rows;
  CsvWriter csv(out_dir / "persistence.csv",
                {"amplitude", "fb_in_window", "classified", "regular", "singular",
                 "undetermined", "all_regular"});
  for (const double amp : amplitudes) {
    const CoefficientField coeffs = modulated_field(grid, base, modulation, amp);
    const ObstacleSolution sol = solve({grid, coeffs, psi}, cfg.solver.tol);
    all_converged = all_converged && sol.diagnostics.converged;

    long in_window = 0, classified = 0, regular = 0, singular = 0, undetermined = 0;
    const Ball window{grid.center, cfg.persistence.window_r};
    for (const auto& cell : cells_of(sol.fb_cells)) {
      const Point p = grid.cell_center(cell[0], cell[1]);
      if (!window.contains(p)) continue;
      ++in_window;
      if (!ball_inside_square(grid, p, ladder.front())) continue;
      ++classified;
      const ClassificationVerdict verdict =
          classify(density_profile(sol, p, ladder), cfg.classify.eps, cfg.classify.r0,
                   cfg.classify.tau);
      if (verdict.verdict == Verdict::Regular) ++regular;
      else if (verdict.verdict == Verdict::Singular) ++singular;
      else ++undetermined;
    }
    const bool all_regular = classified > 0 && regular == classified;
    if (amp == 0.0) zero_amp_regular = all_regular;
    rows.push_back({amp, all_regular});
    csv.row({amp, static_cast<double>(in_window), static_cast<double>(classified),
             static_cast<double>(regular), static_cast<double>(singular),
             static_cast<double>(undetermined), all_regular ? 1.0 : 0.0});
  }
  report.files.push_back(out_dir / "persistence.csv");

  // Largest amplitude below which every tested amplitude keeps all verdicts
  // Regular (the reported persistence threshold).
  std::sort(rows.begin(), rows.end(),
            [](const AmpRow& a, const AmpRow& b) { return a.amplitude < b.amplitude; });
  double threshold = -1.0;
  for (const AmpRow& row : rows) {
    if (!row.all_regular) break;
    threshold = row.amplitude;
  }
  report.add_scalar("regular_threshold", threshold);

  report.check("persistence.solver_converged", all_converged, "all solves converged");
  report.check("persistence.zero_amplitude_regular", zero_amp_regular,
               "unperturbed run classifies every free-boundary cell Regular");
  return report;
}

ExperimentReport run_alternative(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir) {
  ExperimentReport report;
  report.experiment = "alternative";

  const ObstacleProblem problem = build_problem(cfg);
  const Grid& grid = problem.grid;
  const ObstacleSolution sol = solve(problem, cfg.solver.tol);
  report.check("alternative.solver_converged", sol.diagnostics.converged,
               "residual " + fmt(sol.diagnostics.residual));

  const std::vector<double> ladder = dyadic_ladder(cfg.alternative.r_max, 4.0 * grid.h());
  if (ladder.empty())
    throw std::invalid_argument("alternative: probe radii all under 4h; refine the grid");

  struct Probe {
    Point p;
    int kind;  // 0 free boundary, 1 deep positivity set, 2 deep contact set
  };
  std::vector<Probe> probes;
  {
    std::vector<Point> fb_fitting;
    for (const auto& cell : cells_of(sol.fb_cells)) {
      const Point p = grid.cell_center(cell[0], cell[1]);
      if (ball_inside_square(grid, p, ladder.front())) fb_fitting.push_back(p);
    }
    for (std::size_t k = 0; k < fb_fitting.size() &&
                            probes.size() < static_cast<std::size_t>(cfg.alternative.max_probes);
         k += static_cast<std::size_t>(cfg.alternative.probe_stride))
      probes.push_back({fb_fitting[k], 0});
    if (fb_fitting.empty()) report.notes.push_back("no free boundary");
  }
  auto deep_probe = [&](const CellSet& s, int kind, const char* label) {
    const auto cells = cells_of(s);
    if (cells.empty()) {
      report.notes.push_back(std::string("empty ") + label + "; deep probe skipped");
      return;
    }
    const Point c = centroid(s);
    double best = std::numeric_limits<double>::infinity();
    Point best_p{0.0, 0.0};
    bool found = false;
    for (const auto& cell : cells) {
      const Point p = grid.cell_center(cell[0], cell[1]);
      if (!ball_inside_square(grid, p, ladder.front())) continue;
      const double d = std::hypot(p[0] - c[0], p[1] - c[1]);
      if (d < best) {
        best = d;
        best_p = p;
        found = true;
      }
    }
    if (found) probes.push_back({best_p, kind});
    else report.notes.push_back(std::string(label) + " probe balls do not fit the grid");
  };
  deep_probe(sol.active, 1, "positivity set");
  deep_probe(sol.contact, 2, "contact set");

  const double lo = 2.0 * cfg.classify.eps;
  const double hi = 0.5 - 2.0 * cfg.classify.eps;
  long regular = 0, singular = 0, undetermined = 0, stabilized = 0;
  std::string offenders;
  CsvWriter probe_csv(out_dir / "alternative_probes.csv",
                      {"probe", "x", "y", "kind", "verdict", "witness_t"});
  CsvWriter density_csv(out_dir / "alternative_density.csv", {"probe", "r", "g"});
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const DensityProfile profile = density_profile(sol, probes[k].p, ladder);
    const ClassificationVerdict verdict =
        classify(profile, cfg.classify.eps, cfg.classify.r0, cfg.classify.tau);
    if (verdict.verdict == Verdict::Regular) ++regular;
    else if (verdict.verdict == Verdict::Singular) ++singular;
    else ++undetermined;

    bool in_gap = profile.radii.size() >= 3;
    for (std::size_t m = profile.radii.size() >= 3 ? profile.radii.size() - 3 : 0;
         m < profile.radii.size(); ++m)
      in_gap = in_gap && profile.g_values[m] >= lo && profile.g_values[m] <= hi;
    if (in_gap) {
      ++stabilized;
      offenders += " probe " + std::to_string(k);
    }

    probe_csv.row({static_cast<double>(k), probes[k].p[0], probes[k].p[1],
                   static_cast<double>(probes[k].kind),
                   static_cast<double>(static_cast<int>(verdict.verdict)), verdict.witness_t});
    for (std::size_t m = 0; m < profile.radii.size(); ++m)
      density_csv.row({static_cast<double>(k), profile.radii[m], profile.g_values[m]});
  }
  report.files.push_back(out_dir / "alternative_probes.csv");
  report.files.push_back(out_dir / "alternative_density.csv");

  report.add_scalar("probes_total", static_cast<double>(probes.size()));
  report.add_scalar("verdict_regular", static_cast<double>(regular));
  report.add_scalar("verdict_singular", static_cast<double>(singular));
  report.add_scalar("verdict_undetermined", static_cast<double>(undetermined));
  report.add_scalar("stabilized_midrange", static_cast<double>(stabilized));
  report.check("alternative.no_midrange_stabilization", stabilized == 0,
               stabilized == 0
                   ? "no density settles in [" + fmt(lo) + ", " + fmt(hi) + "]"
                   : "densities settle in [" + fmt(lo) + ", " + fmt(hi) + "]:" + offenders);
  return report;
}

ExperimentReport run_penalized_path(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out_dir) {
  ExperimentReport report;
  report.experiment = "penalized-path";

  const ObstacleProblem problem = build_problem(cfg);
  const std::vector<PathEntry> path =
      penalized_path(problem, cfg.penalized.eps_list, cfg.solver.tol, cfg.penalized.t_steps);

  bool all_converged = true;
  std::vector<double> distances;
  CsvWriter csv(out_dir / "penalized_path.csv",
                {"eps", "residual", "distance_to_oracle", "iterations", "converged"});
  for (std::size_t k = 0; k < path.size(); ++k) {
    const PathEntry& e = path[k];
    csv.row({e.eps, e.residual, e.distance_to_oracle, static_cast<double>(e.iterations),
             e.converged ? 1.0 : 0.0});
    const std::string suffix = "_" + std::to_string(k);
    report.add_scalar("eps" + suffix, e.eps);
    report.add_scalar("distance" + suffix, e.distance_to_oracle);
    distances.push_back(e.distance_to_oracle);
    all_converged = all_converged && e.converged;
  }
  report.files.push_back(out_dir / "penalized_path.csv");
  report.add_scalar("h", problem.grid.h());

  report.check("penalized.all_converged", all_converged, "all continuation stages converged");
  const auto [ok, detail] = non_increasing(distances, 0.10);
  report.check("penalized.distance_non_increasing", ok, detail);
  return report;
}

namespace {

/// Shared by the main and control runs of the counterexample experiment.
struct SplitOutcome {
  BetaPin pin;
  std::vector<BlowupRecord> even_records, odd_records;
  SubsequenceVerdict even, odd;
  std::size_t even_matched = 0, odd_matched = 0;
};

SplitOutcome judge_split(const StencilOperator& op, const CoefficientField& coeffs,
                         const SymMatrix2& datum_A, const Point& nu, double beta_lo,
                         double beta_hi, const std::vector<double>& even_radii,
                         const std::vector<double>& odd_radii,
                         const std::vector<ReferenceProfile>& references, const Grid& out_grid,
                         double collar, double even_target, double odd_target, double tol,
                         const CellSet* pin_warm = nullptr) {
  SplitOutcome outcome;
  outcome.pin = pin_origin_to_fb(op, datum_A, nu, beta_lo, beta_hi, tol, pin_warm);
  outcome.even_records = blowup_sequence(outcome.pin.solution, coeffs, even_radii, references,
                                         out_grid, collar);
  outcome.odd_records =
      blowup_sequence(outcome.pin.solution, coeffs, odd_radii, references, out_grid, collar);

  auto nearest_reference = [&](double target) {
    std::size_t best = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < references.size(); ++j) {
      const double d = std::abs(references[j].A.quad(nu) - target);
      if (d < gap) {
        gap = d;
        best = j;
      }
    }
    return best;
  };
  outcome.even_matched = nearest_reference(even_target);
  outcome.odd_matched = nearest_reference(odd_target);
  outcome.even = judge_records(outcome.even_records, outcome.even_matched);
  outcome.odd = judge_records(outcome.odd_records, outcome.odd_matched);
  return outcome;
}

void write_split_csv(const std::filesystem::path& path,
                     const std::vector<ReferenceProfile>& references, const Point& nu,
                     const SplitOutcome& s, double avg_tol, double even_target,
                     double odd_target) {
  std::vector<std::string> columns{"parity", "r",       "avg_a11",  "avg_a12",
                                   "avg_a22", "beta_hat", "min_value"};
  for (const ReferenceProfile& ref : references)
    columns.push_back("dist_ref_" + format_double(ref.A.quad(nu)));
  columns.push_back("matched_ratio");
  columns.push_back("avg_within_tol");
  CsvWriter csv(path, columns);

  auto emit = [&](const std::vector<BlowupRecord>& records, double parity, std::size_t matched,
                  double target) {
    for (const BlowupRecord& rec : records) {
      std::vector<double> row{parity,          rec.r,        rec.A_r.a11, rec.A_r.a12,
                              rec.A_r.a22,     rec.beta_hat, rec.min_value};
      for (const double d : rec.distances) row.push_back(d);
      double mismatched = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < rec.distances.size(); ++j)
        if (j != matched) mismatched = std::min(mismatched, rec.distances[j]);
      row.push_back(mismatched / std::max(rec.distances[matched], 1e-300));
      row.push_back(std::abs(rec.A_r.a11 - target) <= avg_tol ? 1.0 : 0.0);
      csv.row(row);
    }
  };
  emit(s.even_records, 0.0, s.even_matched, even_target);
  emit(s.odd_records, 1.0, s.odd_matched, odd_target);
}

}  // namespace

ExperimentReport run_counterexample(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out_dir) {
  if (cfg.coefficients.kind != "counterexample")
    throw std::invalid_argument(
        "counterexample experiment needs the oscillating coefficient kind");
  ExperimentReport report;
  report.experiment = "counterexample";
  const CounterexampleConfig& cx = cfg.counterexample;

  const Grid grid = make_grid(cfg.grid);
  const RadialProfile profile = make_profile(cfg.coefficients);
  const CoefficientField coeffs = radial_scalar_field(grid, profile);
  const StencilOperator op = assemble(coeffs);
  const Point nu = unit_normal(cfg.boundary);
  const SymMatrix2 datum_A = halfspace_datum_matrix(cfg.coefficients, cfg.boundary);
  const double tol = cfg.solver.tol;
  const double even_target = profile.max_value();
  const double odd_target = profile.min_value();

  const Grid out_grid = build_grid(cfg.blowup.out_extent, cfg.blowup.n_out, {0.0, 0.0});
  std::vector<ReferenceProfile> references;
  for (const double c : cfg.blowup.reference_coefficients)
    references.push_back({{c, 0.0, c}, nu});
  if (references.size() < 2)
    throw std::invalid_argument("counterexample: need at least two reference profiles");

  auto usable = [&](std::vector<double> radii, const Grid& g) {
    std::sort(radii.begin(), radii.end(), std::greater<>());
    std::vector<double> kept;
    for (const double r : radii)
      if (r >= 8.0 * g.h() && r * 0.5 * out_grid.extent <= 0.5 * g.extent - g.h()) {
        if (kept.empty() || r < kept.back()) kept.push_back(r);
      }
    return kept;
  };
  const double s = cfg.coefficients.phase_speed;
  const int m = cfg.coefficients.junction_index;
  const std::vector<double> even_radii =
      usable(cx.even_radii.empty() ? phase_radii(s, m, 0, 8.0 * grid.h(), 1.0) : cx.even_radii,
             grid);
  const std::vector<double> odd_radii =
      usable(cx.odd_radii.empty() ? phase_radii(s, m, 1, 8.0 * grid.h(), 1.0) : cx.odd_radii,
             grid);

  // Coarse-to-fine offset bracket: bisect on a cheap grid first, then hand a
  // padded bracket plus the resampled coarse contact set to the production
  // grid, so its first solve starts near the answer instead of all-active.
  double beta_lo = cx.beta_lo, beta_hi = cx.beta_hi;
  bool padded = false;
  CellSet fine_warm;
  try {
    if (cx.coarse_n_cells >= 8 && cx.coarse_n_cells < grid.n_cells) {
      GridConfig coarse_gc = cfg.grid;
      coarse_gc.n_cells = cx.coarse_n_cells;
      const Grid coarse_grid = make_grid(coarse_gc);
      const StencilOperator coarse_op = assemble(radial_scalar_field(coarse_grid, profile));
      const BetaPin coarse_pin =
          pin_origin_to_fb(coarse_op, datum_A, nu, cx.beta_lo, cx.beta_hi, tol);
      const double pad = std::max(0.02, 8.0 * coarse_grid.h() * coarse_grid.h());
      beta_lo = std::max(cx.beta_lo, coarse_pin.beta - pad);
      beta_hi = std::min(cx.beta_hi, coarse_pin.beta + pad);
      fine_warm = resample_mask(coarse_pin.solution.contact, grid);
      padded = true;
    }
  } catch (const std::runtime_error&) {
    // Coarse pre-bracketing is an optimization only; fall back to the full
    // bracket on the production grid.
    beta_lo = cx.beta_lo;
    beta_hi = cx.beta_hi;
    padded = false;
  }

  SplitOutcome main_run;
  try {
    try {
      main_run = judge_split(op, coeffs, datum_A, nu, beta_lo, beta_hi, even_radii, odd_radii,
                             references, out_grid, cfg.blowup.collar_factor, even_target,
                             odd_target, tol, padded ? &fine_warm : nullptr);
    } catch (const std::runtime_error&) {
      if (!padded) throw;
      main_run = judge_split(op, coeffs, datum_A, nu, cx.beta_lo, cx.beta_hi, even_radii,
                             odd_radii, references, out_grid, cfg.blowup.collar_factor,
                             even_target, odd_target, tol);
    }
  } catch (const std::runtime_error& e) {
    const std::filesystem::path diag = out_dir / "beta_bisection_failure.txt";
    std::ofstream out(diag);
    out << "offset bisection failed: " << e.what() << "\nbracket [" << fmt(cx.beta_lo) << ", "
        << fmt(cx.beta_hi) << "]\n";
    out.close();
    report.files.push_back(diag);
    report.check("counterexample.beta_bisection", false, e.what());
    return report;
  }

  report.check("counterexample.origin_on_fb", main_run.pin.origin_on_fb,
               "pinned offset " + fmt(main_run.pin.beta) + " after " +
                   std::to_string(main_run.pin.solves) + " solves");
  report.check("counterexample.even_matched_closer", main_run.even.matched_closer,
               "margin " + fmt(main_run.even.margin) + " over " +
                   std::to_string(main_run.even_records.size()) + " radii");
  report.check("counterexample.odd_matched_closer", main_run.odd.matched_closer,
               "margin " + fmt(main_run.odd.margin) + " over " +
                   std::to_string(main_run.odd_records.size()) + " radii");
  report.check("counterexample.even_margin", main_run.even.margin >= cx.margin_factor,
               fmt(main_run.even.margin) + " vs required " + fmt(cx.margin_factor));
  report.check("counterexample.odd_margin", main_run.odd.margin >= cx.margin_factor,
               fmt(main_run.odd.margin) + " vs required " + fmt(cx.margin_factor));

  double gap = 0.0;
  if (!main_run.even_records.empty() && !main_run.odd_records.empty())
    gap = sup_distance_in_ball(main_run.even_records.front().rescaled,
                               main_run.odd_records.front().rescaled, Ball{{0.0, 0.0}, 0.5});
  report.check("counterexample.rescalings_distinct", gap >= cx.min_gap,
               "max-norm gap " + fmt(gap) + " vs required " + fmt(cx.min_gap));

  write_split_csv(out_dir / "counterexample.csv", references, nu, main_run, cx.avg_tol,
                  even_target, odd_target);
  report.files.push_back(out_dir / "counterexample.csv");

  // Constant-coefficient negative control: same pipeline, no phase split.
  GridConfig control_gc = cfg.grid;
  control_gc.n_cells = cx.control_n_cells;
  const Grid control_grid = make_grid(control_gc);
  const SymMatrix2 control_A{cx.control_value, 0.0, cx.control_value};
  const CoefficientField control_coeffs = constant_field(control_grid, control_A);
  const StencilOperator control_op = assemble(control_coeffs);
  SplitOutcome control_run;
  bool control_pinned = true;
  try {
    control_run = judge_split(control_op, control_coeffs, control_A, nu, cx.beta_lo, cx.beta_hi,
                              usable(even_radii, control_grid), usable(odd_radii, control_grid),
                              references, out_grid, cfg.blowup.collar_factor, even_target,
                              odd_target, tol);
  } catch (const std::runtime_error& e) {
    control_pinned = false;
    report.check("counterexample.control_origin_on_fb", false, e.what());
  }
  if (control_pinned) {
    report.check("counterexample.control_origin_on_fb", control_run.pin.origin_on_fb,
                 "pinned offset " + fmt(control_run.pin.beta));
    const bool control_split =
        control_run.even.matched_closer && control_run.odd.matched_closer &&
        control_run.even.margin >= cx.margin_factor && control_run.odd.margin >= cx.margin_factor;
    report.check("counterexample.control_no_split", !control_split,
                 "control margins " + fmt(control_run.even.margin) + " / " +
                     fmt(control_run.odd.margin));
    write_split_csv(out_dir / "counterexample_control.csv", references, nu, control_run,
                    cx.avg_tol, even_target, odd_target);
    report.files.push_back(out_dir / "counterexample_control.csv");
    report.add_scalar("control_even_margin", control_run.even.margin);
    report.add_scalar("control_odd_margin", control_run.odd.margin);
    report.add_scalar("control_beta", control_run.pin.beta);
  }

  report.add_scalar("beta", main_run.pin.beta);
  report.add_scalar("even_margin", main_run.even.margin);
  report.add_scalar("odd_margin", main_run.odd.margin);
  report.add_scalar("distinct_gap", gap);
  report.add_scalar("even_count", static_cast<double>(main_run.even_records.size()));
  report.add_scalar("odd_count", static_cast<double>(main_run.odd_records.size()));

  if (cfg.output.write_fields) {
    for (const std::string& p :
         write_solution(main_run.pin.solution, (out_dir / "counterexample").string(),
                        coefficient_descriptor(cfg.coefficients)))
      report.files.emplace_back(p);
    if (!main_run.even_records.empty()) {
      write_field(out_dir / "counterexample_rescaled_even.field",
                  main_run.even_records.front().rescaled);
      report.files.push_back(out_dir / "counterexample_rescaled_even.field");
    }
    if (!main_run.odd_records.empty()) {
      write_field(out_dir / "counterexample_rescaled_odd.field",
                  main_run.odd_records.front().rescaled);
      report.files.push_back(out_dir / "counterexample_rescaled_odd.field");
    }
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir) {
  if (cfg.experiment == "exact") return run_exact(cfg, out_dir);
  if (cfg.experiment == "stability") return run_stability(cfg, out_dir);
  if (cfg.experiment == "persistence") return run_persistence(cfg, out_dir);
  if (cfg.experiment == "counterexample") return run_counterexample(cfg, out_dir);
  if (cfg.experiment == "alternative") return run_alternative(cfg, out_dir);
  if (cfg.experiment == "penalized-path") return run_penalized_path(cfg, out_dir);
  throw std::invalid_argument("unknown experiment: " + cfg.experiment);
}

}  // namespace oblab
