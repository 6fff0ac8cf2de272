#include "oblab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "json.hpp"
#include "oblab/blowup.hpp"
#include "oblab/config.hpp"
#include "oblab/experiments.hpp"
#include "oblab/fb_analysis.hpp"
#include "oblab/io.hpp"
#include "oblab/manifest.hpp"
#include "oblab/obstacle.hpp"
#include "oblab/penalty.hpp"
#include "oblab/stencil.hpp"
#include "oblab/vmo.hpp"

namespace oblab {

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  bool seedless = false;
};

std::vector<double> dyadic_ladder(double r_max, double r_min) {
  std::vector<double> radii;
  for (double r = r_max; r >= r_min && radii.size() < 24; r *= 0.5) radii.push_back(r);
  return radii;
}

double sup_in_ball(const ScalarField& f, const Ball& window) {
  const int n = f.grid.n_cells;
  double sup = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (window.contains(f.grid.cell_center(i, j))) sup = std::max(sup, f.at(i, j));
  return sup;
}

bool ball_inside_square(const Grid& g, const Point& center, double r) {
  const Point o = g.origin();
  return center[0] - r >= o[0] && center[0] + r <= o[0] + g.extent && center[1] - r >= o[1] &&
         center[1] + r <= o[1] + g.extent;
}

/// solve subcommand: one complementarity solve plus persisted artifacts.
ExperimentReport cmd_solve(const ExperimentConfig& cfg, const fs::path& out) {
  ExperimentReport report;
  report.experiment = "solve";
  const ObstacleProblem problem = build_problem(cfg);
  const ObstacleSolution sol = solve(problem, cfg.solver.tol);
  report.check("solve.converged", sol.diagnostics.converged,
               "residual " + format_double(sol.diagnostics.residual) + " after " +
                   std::to_string(sol.diagnostics.policies) + " policies");
  report.add_scalar("residual", sol.diagnostics.residual);
  report.add_scalar("policies", sol.diagnostics.policies);
  report.add_scalar("contact_cells", static_cast<double>(sol.contact.count()));
  report.add_scalar("fb_cells", static_cast<double>(sol.fb_cells.count()));
  if (cfg.output.write_fields)
    for (const std::string& p : write_solution(sol, (out / "solution").string(),
                                               coefficient_descriptor(cfg.coefficients)))
      report.files.emplace_back(p);
  return report;
}

/// analyze subcommand: static free-boundary analysis of one solve.
ExperimentReport cmd_analyze(const ExperimentConfig& cfg, const fs::path& out) {
  ExperimentReport report;
  report.experiment = "analyze";
  const ObstacleProblem problem = build_problem(cfg);
  const Grid& grid = problem.grid;
  const StencilOperator op = assemble(problem.coeffs);
  const ObstacleSolution sol = solve_obstacle(op, problem.psi, cfg.solver.tol);
  report.check("analyze.solver_converged", sol.diagnostics.converged,
               "residual " + format_double(sol.diagnostics.residual));

  // Quadratic lower-growth audit at free-boundary centers.
  std::vector<double> radii;
  for (const double r : {0.1, 0.2, 0.4})
    if (r >= 8.0 * grid.h()) radii.push_back(r);
  std::vector<Point> centers;
  for (int j = 0; j < grid.n_cells && centers.size() < 64; ++j)
    for (int i = 0; i < grid.n_cells && centers.size() < 64; ++i) {
      if (!sol.fb_cells.contains(i, j)) continue;
      const Point p = grid.cell_center(i, j);
      if (!radii.empty() && ball_inside_square(grid, p, radii.back())) centers.push_back(p);
    }
  if (!radii.empty() && !centers.empty()) {
    std::sort(radii.begin(), radii.end(), std::greater<>());
    const NondegeneracyReport ndg = nondegeneracy_report(sol, op, centers, radii);
    CsvWriter csv(out / "analysis_nondegeneracy.csv",
                  {"x", "y", "r", "sup_w", "required", "margin", "violated"});
    for (const NondegeneracyRow& row : ndg.rows)
      csv.row({row.center[0], row.center[1], row.r, row.sup_w, row.required, row.margin,
               row.violated ? 1.0 : 0.0});
    report.files.push_back(out / "analysis_nondegeneracy.csv");
    report.check("analyze.nondegeneracy", ndg.violations() == 0,
                 std::to_string(ndg.violations()) + " of " + std::to_string(ndg.rows.size()) +
                     " growth checks violated");
    report.add_scalar("nondegeneracy_rows", static_cast<double>(ndg.rows.size()));
  } else {
    report.notes.push_back("no growth checks: radii under 8h or no fitting centers");
  }

  const double diameter = minimum_diameter(sol.contact, Ball{grid.center, 0.5});
  const double sobolev = discrete_sobolev_norm(sol.w, 2.0);
  {
    CsvWriter csv(out / "analysis_summary.csv", {"name", "value"});
    auto named = [&](const char* name, double v) {
      csv.row_mixed({name, format_double(v)});
      report.add_scalar(name, v);
    };
    named("contact_diameter_half_window", diameter);
    named("sobolev_norm", sobolev);
    named("contact_cells", static_cast<double>(sol.contact.count()));
    named("active_cells", static_cast<double>(sol.active.count()));
    named("fb_cells", static_cast<double>(sol.fb_cells.count()));
    named("residual", sol.diagnostics.residual);
  }
  report.files.push_back(out / "analysis_summary.csv");

  if (cfg.output.write_fields)
    for (const std::string& p : write_solution(sol, (out / "analysis").string(),
                                               coefficient_descriptor(cfg.coefficients)))
      report.files.emplace_back(p);
  return report;
}

/// vmo subcommand: oscillation diagnostics for the coefficient family.
ExperimentReport cmd_vmo(const ExperimentConfig& cfg, const fs::path& out) {
  ExperimentReport report;
  report.experiment = "vmo";
  const Grid grid = make_grid(cfg.grid);
  const RadialProfile profile = make_profile(cfg.coefficients);
  const CoefficientField coeffs = make_coefficients(grid, cfg.coefficients);
  const ScalarField channel{grid, coeffs.a11};

  // 2-D modulus of the leading coefficient channel. Extra ball centers sit on
  // the discontinuity circles so jumps cannot slip between lattice centers.
  const std::vector<double> eta_radii = dyadic_ladder(0.25 * grid.extent, 4.0 * grid.h());
  std::vector<Point> extra;
  for (const double rho : profile.jump_radii(4.0 * grid.h(), 0.5 * grid.extent))
    for (int k = 0; k < 16; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / 16.0;
      extra.push_back({rho * std::cos(theta), rho * std::sin(theta)});
    }
  const VmoCurve eta = vmo_modulus(channel, eta_radii, extra);
  {
    CsvWriter csv(out / "vmo_eta.csv", {"r", "eta"});
    for (std::size_t k = 0; k < eta.radii.size(); ++k) csv.row({eta.radii[k], eta.values[k]});
  }
  report.files.push_back(out / "vmo_eta.csv");

  // 1-D profile ladders: four points per decade across five decades.
  std::vector<double> profile_radii;
  for (int k = 0; k <= 20; ++k) profile_radii.push_back(0.5 * std::pow(10.0, -k / 4.0));
  const RadialVmoReport bram = bramanti_check(profile, 0.5, profile_radii);
  const VmoCurve psi = psi_curve(profile, profile_radii);
  {
    CsvWriter csv(out / "vmo_bramanti.csv",
                  {"r", "boundary_term", "derivative_term", "averaged_integral"});
    for (std::size_t k = 0; k < profile_radii.size(); ++k)
      csv.row({profile_radii[k], bram.boundary_term.values[k],
               bram.derivative_term.evaluated ? bram.derivative_term.values[k] : 0.0,
               bram.averaged_integral.evaluated ? bram.averaged_integral.values[k] : 0.0});
  }
  report.files.push_back(out / "vmo_bramanti.csv");
  {
    CsvWriter csv(out / "vmo_psi.csv", {"r", "psi"});
    for (std::size_t k = 0; k < psi.radii.size(); ++k) csv.row({psi.radii[k], psi.values[k]});
  }
  report.files.push_back(out / "vmo_psi.csv");

  nlohmann::json j;
  j["kind"] = cfg.coefficients.kind;
  j["differentiable"] = bram.differentiable;
  j["square_integrable"] = bram.square_integrable;
  j["square_integral"] = bram.square_integral;
  j["all_pass"] = bram.all_pass();
  for (const DecayCondition* cond :
       {&bram.boundary_term, &bram.derivative_term, &bram.averaged_integral}) {
    j["conditions"].push_back({{"name", cond->name},
                               {"evaluated", cond->evaluated},
                               {"passes", cond->passes},
                               {"decay_slope", cond->decay_slope},
                               {"identically_zero", cond->identically_zero}});
  }
  const double eta_min = *std::min_element(eta.values.begin(), eta.values.end());
  const double eta_max = *std::max_element(eta.values.begin(), eta.values.end());
  j["eta_min"] = eta_min;
  j["eta_max"] = eta_max;

  // psi endpoints one and two decades below the largest radius.
  auto psi_at_decade = [&](double decades) {
    const double target = profile_radii.front() * std::pow(10.0, -decades);
    std::size_t best = 0;
    for (std::size_t k = 0; k < psi.radii.size(); ++k)
      if (std::abs(std::log10(psi.radii[k] / target)) <
          std::abs(std::log10(psi.radii[best] / target)))
        best = k;
    return psi.values[best];
  };
  const double psi0 = psi.values.front();
  const double psi1 = psi_at_decade(1.0);
  const double psi2 = psi_at_decade(2.0);
  j["psi_start"] = psi0;
  j["psi_one_decade"] = psi1;
  j["psi_two_decades"] = psi2;
  {
    std::ofstream jf(out / "vmo_report.json");
    jf << j.dump(2) << "\n";
  }
  report.files.push_back(out / "vmo_report.json");

  report.add_scalar("eta_min", eta_min);
  report.add_scalar("eta_max", eta_max);
  report.add_scalar("psi_start", psi0);
  report.add_scalar("psi_two_decades", psi2);

  if (cfg.coefficients.kind == "constant") {
    report.check("vmo.eta_identically_zero", eta_max == 0.0,
                 "largest modulus " + format_double(eta_max));
  } else if (cfg.coefficients.kind == "counterexample") {
    report.check("vmo.bramanti_pass", bram.all_pass(),
                 std::string("decay slopes ") + format_double(bram.boundary_term.decay_slope) +
                     " " + format_double(bram.derivative_term.decay_slope) + " " +
                     format_double(bram.averaged_integral.decay_slope));
    // The oscillation makes psi non-monotone decade to decade; what vanishing
    // mean oscillation guarantees is the net decrease over the span.
    report.check("vmo.psi_decreasing_two_decades", psi2 < psi0,
                 "psi " + format_double(psi0) + " -> " + format_double(psi1) + " -> " +
                     format_double(psi2));
  } else {
    report.check("vmo.hypothesis_failure_flagged",
                 !bram.differentiable && !bram.derivative_term.evaluated &&
                     !bram.averaged_integral.evaluated && !bram.all_pass(),
                 "derivative conditions unevaluated for a profile with jumps");
    report.check("vmo.step_witness", eta_min >= 0.2,
                 "modulus stays at " + format_double(eta_min) + " (non-vanishing oscillation)");
  }
  return report;
}

/// blowup subcommand: origin pinning, rescaling ladder, growth-constant fit.
ExperimentReport cmd_blowup(const ExperimentConfig& cfg, const fs::path& out) {
  ExperimentReport report;
  report.experiment = "blowup";
  const Grid grid = make_grid(cfg.grid);
  const CoefficientField coeffs = make_coefficients(grid, cfg.coefficients);
  const StencilOperator op = assemble(coeffs);
  const Point nu = unit_normal(cfg.boundary);
  const SymMatrix2 datum_A = halfspace_datum_matrix(cfg.coefficients, cfg.boundary);

  BetaPin pin;
  try {
    pin = pin_origin_to_fb(op, datum_A, nu, cfg.blowup.beta_lo, cfg.blowup.beta_hi,
                           cfg.solver.tol);
  } catch (const std::runtime_error& e) {
    std::ofstream diag(out / "beta_bisection_failure.txt");
    diag << "offset bisection failed: " << e.what() << "\nbracket ["
         << format_double(cfg.blowup.beta_lo) << ", " << format_double(cfg.blowup.beta_hi)
         << "]\n";
    diag.close();
    report.files.push_back(out / "beta_bisection_failure.txt");
    report.check("blowup.beta_bisection", false, e.what());
    return report;
  }
  report.check("blowup.origin_on_fb", pin.origin_on_fb,
               "pinned offset " + format_double(pin.beta) + " after " +
                   std::to_string(pin.solves) + " solves");
  report.add_scalar("beta", pin.beta);

  const Grid out_grid = build_grid(cfg.blowup.out_extent, cfg.blowup.n_out, {0.0, 0.0});
  std::vector<double> radii = cfg.blowup.radii;
  if (radii.empty()) radii = dyadic_ladder(0.125 * grid.extent, 8.0 * grid.h());
  std::vector<ReferenceProfile> references;
  for (const double c : cfg.blowup.reference_coefficients) references.push_back({{c, 0.0, c}, nu});

  const std::vector<BlowupRecord> records =
      blowup_sequence(pin.solution, coeffs, radii, references, out_grid,
                      cfg.blowup.collar_factor);
  {
    std::vector<std::string> columns{"r",        "avg_a11",  "avg_a12", "avg_a22",
                                     "beta_hat", "min_value"};
    for (const ReferenceProfile& ref : references)
      columns.push_back("dist_ref_" + format_double(ref.A.quad(nu)));
    CsvWriter csv(out / "blowup.csv", columns);
    for (const BlowupRecord& rec : records) {
      std::vector<double> row{rec.r,        rec.A_r.a11, rec.A_r.a12,
                              rec.A_r.a22,  rec.beta_hat, rec.min_value};
      for (const double d : rec.distances) row.push_back(d);
      csv.row(row);
    }
  }
  report.files.push_back(out / "blowup.csv");

  // Quadratic growth constant: least-squares fit of sup_{B_r} w against r^2
  // through the origin over the dyadic ladder in [8h, 0.5].
  const std::vector<double> growth_radii = dyadic_ladder(0.5, 8.0 * grid.h());
  double num = 0.0, den = 0.0;
  {
    CsvWriter csv(out / "blowup_growth.csv", {"r", "sup_w", "sup_over_r2"});
    for (const double r : growth_radii) {
      const double sup = sup_in_ball(pin.solution.w, Ball{{0.0, 0.0}, r});
      csv.row({r, sup, sup / (r * r)});
      num += sup * r * r;
      den += r * r * r * r;
    }
  }
  report.files.push_back(out / "blowup_growth.csv");
  const double growth_constant = den > 0.0 ? num / den : 0.0;
  report.add_scalar("growth_constant", growth_constant);

  if (cfg.output.write_fields && !records.empty()) {
    write_field(out / "blowup_rescaled_first.field", records.front().rescaled);
    report.files.push_back(out / "blowup_rescaled_first.field");
    for (const std::string& p : write_solution(pin.solution, (out / "blowup").string(),
                                               coefficient_descriptor(cfg.coefficients)))
      report.files.emplace_back(p);
  }
  return report;
}

int execute(const std::string& command, const CommonOpts& opts,
            const std::function<ExperimentReport(const ExperimentConfig&, const fs::path&)>& fn) {
  const ExperimentConfig cfg = load_config(opts.config_path);
  const fs::path out{opts.out_dir};
  fs::create_directories(out);

  RunManifest manifest;
  manifest.command = command;
  manifest.code_version = code_version_stamp();
  manifest.config_echo = serialize_config(cfg);
  if (opts.seedless)
    manifest.assertions.push_back(
        {"run.seedless", true, "the pipeline draws no random numbers by construction"});

  ExperimentReport report;
  {
    StageTimer timer(manifest, command);
    report = fn(cfg, out);
  }
  for (const Assertion& a : report.assertions) manifest.assertions.push_back(a);

  if (!report.scalars.empty()) {
    CsvWriter csv(out / "report_scalars.csv", {"name", "value"});
    for (const auto& [name, value] : report.scalars)
      csv.row_mixed({name, format_double(value)});
    report.files.push_back(out / "report_scalars.csv");
  }
  for (const fs::path& p : report.files) manifest.add_file(out, p);

  const fs::path report_path = write_assertion_report(out, manifest.assertions);
  manifest.add_file(out, report_path);
  write_manifest(out / "manifest.json", manifest);

  for (const Assertion& a : manifest.assertions)
    std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
  for (const std::string& note : report.notes) std::cout << "note: " << note << "\n";
  std::cout << "manifest: " << (out / "manifest.json").string() << "\n";
  if (!manifest.all_pass()) {
    std::cout << "FAILED: " << report_path.string() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"finite-difference laboratory for the obstacle problem"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "configuration file")->required();
    sub->add_option("--out", opts.out_dir, "output directory (default: out)");
    sub->add_option("--threads", opts.threads, "worker threads (reserved; runs are sequential)");
    sub->add_flag("--seedless", opts.seedless,
                  "record the no-randomness guarantee as an assertion");
    return sub;
  };
  CLI::App* solve_cmd = add_common(app.add_subcommand("solve", "one complementarity solve"));
  CLI::App* analyze_cmd =
      add_common(app.add_subcommand("analyze", "free-boundary analysis of one solve"));
  CLI::App* experiment_cmd =
      add_common(app.add_subcommand("experiment", "run the configured experiment"));
  CLI::App* vmo_cmd = add_common(app.add_subcommand("vmo", "coefficient oscillation report"));
  CLI::App* blowup_cmd =
      add_common(app.add_subcommand("blowup", "rescaling ladder at a pinned origin"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve_cmd->parsed()) return execute("solve", opts, cmd_solve);
    if (analyze_cmd->parsed()) return execute("analyze", opts, cmd_analyze);
    if (experiment_cmd->parsed())
      return execute("experiment", opts,
                     [](const ExperimentConfig& c, const fs::path& o) {
                       return run_experiment(c, o);
                     });
    if (vmo_cmd->parsed()) return execute("vmo", opts, cmd_vmo);
    if (blowup_cmd->parsed()) return execute("blowup", opts, cmd_blowup);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace oblab
