#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "oblab/config.hpp"
#include "oblab/manifest.hpp"
#include "oblab/problem.hpp"

namespace oblab {

/// Outcome of one experiment: named pass/fail assertions, the artifact files
/// written under the output directory, headline numbers by name, and free-form
/// notes. Deterministic given the config: sweep orders are fixed and nothing
/// in the pipeline draws random numbers.
struct ExperimentReport {
  std::string experiment;
  std::vector<Assertion> assertions;
  std::vector<std::filesystem::path> files;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::string> notes;

  bool all_pass() const;
  void check(const std::string& name, bool pass, const std::string& detail);
  void add_scalar(const std::string& name, double value);
  /// Looks up a headline number; throws std::out_of_range if absent.
  double scalar(const std::string& name) const;
};

/// Config-to-object builders shared by the experiments and the CLI.
Grid make_grid(const GridConfig& gc);
/// The 1-D radius profile named by the coefficient config (the constant kind
/// maps to a constant profile at a11).
RadialProfile make_profile(const CoefficientConfig& cc);
CoefficientField make_coefficients(const Grid& grid, const CoefficientConfig& cc);
/// Constant matrix defining the half-space Dirichlet datum
/// (1 / (2 nu^T A nu)) ((x . nu - beta)_+)^2: the configured override if set,
/// the coefficient matrix itself for the constant kind, else the outer
/// profile value times the identity.
SymMatrix2 halfspace_datum_matrix(const CoefficientConfig& cc, const BoundaryConfig& bc);
Point unit_normal(const BoundaryConfig& bc);
/// One-line human-readable description of the coefficient family, embedded
/// in solution diagnostics.
std::string coefficient_descriptor(const CoefficientConfig& cc);
ScalarField make_boundary_data(const Grid& grid, const CoefficientConfig& cc,
                               const BoundaryConfig& bc);
ObstacleProblem build_problem(const ExperimentConfig& cfg);

/// Manufactured-solution experiment: constant coefficients with half-space
/// data, solved at n and 2n. Records max error against the closed form, the
/// free-boundary offset, and the observed convergence order.
ExperimentReport run_exact(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Coefficient-stability sweep: for each delta (decreasing) solve with
/// (1+delta) times the base matrix and the unchanged boundary data, and
/// measure the contact-set symmetric difference and max-norm distance to the
/// base solution inside B_1. Both sequences must be non-increasing within
/// 10% slack. For isotropic constant bases the 1-D closed-form offset
/// beta(a) = 1 - sqrt(2 a c) gives a predicted symmetric-difference area,
/// recorded alongside the measurement.
ExperimentReport run_stability(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Regular-free-boundary persistence: perturb a constant base matrix by a
/// radial oscillation of each configured amplitude (amplitude 0 is appended
/// as a control when absent), re-solve, and classify every free-boundary
/// cell inside the window. Records the largest amplitude below which all
/// verdicts are Regular.
ExperimentReport run_persistence(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir);

/// Oscillating-coefficient blowup split: pin the origin to the free boundary
/// by offset bisection (coarse grid first when configured), rescale along the
/// even- and odd-phase radius subsequences, and compare each rescaling to the
/// half-space reference profiles. Asserts the matched reference is closer on
/// each subsequence with the configured margin, that the two subsequences'
/// rescalings differ, and that the constant-coefficient control shows no such
/// split. A failed bisection is reported as a failing assertion plus a
/// diagnostics file instead of an exception.
ExperimentReport run_counterexample(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out_dir);

/// Density-dichotomy probe sweep: solve, probe every probe_stride-th
/// free-boundary cell (capped at max_probes) plus one deep interior cell of
/// each of the positivity and contact sets, record density profiles on a
/// dyadic radius ladder, classify each probe, and assert no probe's density
/// stabilizes strictly between the two admissible limits across the last
/// three radii.
ExperimentReport run_alternative(const ExperimentConfig& cfg,
                                 const std::filesystem::path& out_dir);

/// Penalized continuation path: distance to the complementarity solution per
/// ramp width, asserted non-increasing within 10% slack.
ExperimentReport run_penalized_path(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out_dir);

/// Dispatches on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir);

}  // namespace oblab
