#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "oblab/grid.hpp"

namespace oblab {

/// Malformed-configuration error carrying the 1-based line number (0 when the
/// problem is not tied to a specific line) and the dotted field path.
struct ConfigError : public std::runtime_error {
  int line = 0;
  std::string field;

  ConfigError(int line_number, std::string field_path, const std::string& message);
};

struct GridConfig {
  double extent = 2.0;
  int n_cells = 128;
  Point center{0.0, 0.0};
};

struct CoefficientConfig {
  /// constant | counterexample | dyadic-step
  std::string kind = "constant";
  // constant kind: the matrix entries.
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;
  // counterexample kind: oscillation speed and the odd junction index m
  // fixing the cutoff omega = exp(-exp(m / phase_speed)).
  double phase_speed = 4.0;
  int junction_index = 1;
  // dyadic-step kind: values on alternating dyadic annuli (value_a outermost).
  double value_a = 2.0, value_b = 3.0;
};

struct BoundaryConfig {
  /// halfspace | constant | zero
  std::string kind = "halfspace";
  double beta = 0.3;
  double nu_x = 0.0, nu_y = 1.0;
  /// nu^T A nu of the half-space datum; 0 means "derive from coefficients"
  /// (matrix quadratic form for constant kind, outer profile value for the
  /// radial kinds).
  double datum_coefficient = 0.0;
  /// Level of the constant datum kind.
  double value = 0.3;
};

struct SolverConfig {
  double tol = 1e-9;
};

struct PenalizedConfig {
  std::vector<double> eps_list{0.2, 0.1, 0.05, 0.025};
  int t_steps = 10;
};

struct StabilityConfig {
  std::vector<double> delta_list{0.2, 0.1, 0.05};
};

struct ClassifyConfig {
  double eps = 0.05;
  double r0 = 0.25;
  double tau = 0.5;
};

struct BlowupConfig {
  /// Empty means a dyadic ladder derived from the grid.
  std::vector<double> radii;
  int n_out = 128;
  double out_extent = 1.5;
  double collar_factor = 4.0;
  /// Offset bracket for pinning the origin to the free boundary.
  double beta_lo = -0.1, beta_hi = 0.1;
  /// Scalars c: each reference is the half-space profile of c * identity
  /// with the boundary normal.
  std::vector<double> reference_coefficients{2.0, 3.0};
};

struct CounterexampleConfig {
  double margin_factor = 2.0;
  /// Tolerance for "averaged scalar coefficient near 2 (resp. 3)" flags.
  double avg_tol = 0.1;
  double beta_lo = -0.1, beta_hi = 0.1;
  /// Radius subsequences; empty means the oscillation-phase extrema inside
  /// the resolvable range.
  std::vector<double> even_radii, odd_radii;
  /// Required max-norm gap between the even- and odd-subsequence rescalings.
  /// The gap grows as the radii shrink; the default only demands that the two
  /// rescalings are distinct well above solver tolerance at desk-size radii.
  double min_gap = 1e-4;
  /// Constant-coefficient negative control: value * identity on a grid with
  /// control_n_cells per side.
  double control_value = 2.5;
  int control_n_cells = 256;
  /// Pre-bracketing grid for the offset bisection; 0 disables it.
  int coarse_n_cells = 128;
};

struct PersistenceConfig {
  std::vector<double> amplitude_list{0.1, 0.05, 0.02};
  double window_r = 0.5;
};

struct AlternativeConfig {
  /// Every probe_stride-th free-boundary cell becomes a probe.
  int probe_stride = 8;
  int max_probes = 12;
  double r_max = 0.25;
};

struct OutputConfig {
  bool write_fields = true;
};

struct ExperimentConfig {
  /// exact | stability | alternative | counterexample | penalized-path |
  /// persistence
  std::string experiment = "exact";
  GridConfig grid;
  CoefficientConfig coefficients;
  BoundaryConfig boundary;
  SolverConfig solver;
  PenalizedConfig penalized;
  StabilityConfig stability;
  ClassifyConfig classify;
  BlowupConfig blowup;
  CounterexampleConfig counterexample;
  PersistenceConfig persistence;
  AlternativeConfig alternative;
  OutputConfig output;
};

/// Parses the INI-style configuration text. Unknown sections or keys,
/// malformed values, and out-of-range values all raise ConfigError with the
/// offending line and dotted field path. Keys not present keep their
/// documented defaults.
ExperimentConfig parse_config(const std::string& text);

/// Reads and parses a configuration file; unreadable paths raise ConfigError.
ExperimentConfig load_config(const std::string& path);

/// Canonical text form listing every key; parse_config(serialize_config(c))
/// reproduces c exactly (doubles serialized at 17 significant digits).
std::string serialize_config(const ExperimentConfig& config);

}  // namespace oblab
