#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oblab/config.hpp"
#include "oblab/io.hpp"
#include "oblab/runner.hpp"

using namespace oblab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "oblab_cli_tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

/// Invokes the CLI exactly as a shell would, argv[0] included.
int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("oblab");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

/// Parses `text`, expecting a ConfigError at the given line and field whose
/// message mentions `fragment`.
void expect_config_error(const std::string& text, int line, const std::string& field,
                         const std::string& fragment) {
  try {
    parse_config(text);
    FAIL_CHECK("expected ConfigError for field '" << field << "', none thrown");
  } catch (const ConfigError& e) {
    CHECK(e.line == line);
    CHECK(e.field == field);
    CHECK_MESSAGE(contains(e.what(), fragment),
                  "message '" << e.what() << "' lacks '" << fragment << "'");
    CHECK_MESSAGE(contains(e.what(), "line " + std::to_string(line)),
                  "message '" << e.what() << "' lacks the line number");
    CHECK_MESSAGE(contains(e.what(), field),
                  "message '" << e.what() << "' lacks the field path");
  }
}

const char* kFullConfig = R"(# exercises every section with non-default values
[experiment]
name = counterexample

[grid]
extent = 4.0
n_cells = 96
center_x = 0.5
center_y = -0.25

[coefficients]
kind = counterexample
a11 = 2.5
a12 = -0.75
a22 = 1.25
phase_speed = 6.0
junction_index = 3
value_a = 1.5
value_b = 4.5

[boundary]
kind = constant
beta = 0.125
nu_x = 0.6
nu_y = 0.8
datum_coefficient = 2.0
value = 0.4

[solver]
tol = 1e-8

[penalized]
eps_list = 0.4, 0.2, 0.1
t_steps = 6

[stability]
delta_list = 0.3, 0.15

[classify]
eps = 0.04
r0 = 0.2
tau = 0.75

[blowup]
radii = 0.5, 0.25, 0.125
n_out = 64
out_extent = 1.25
collar_factor = 3.0
beta_lo = -0.05
beta_hi = 0.2
reference_coefficients = 1.0, 2.0, 3.0

[counterexample]
margin_factor = 1.5
avg_tol = 0.2
beta_lo = -0.2
beta_hi = 0.05
even_radii = 0.2, 0.1
odd_radii = 0.15, 0.075
min_gap = 0.001
control_value = 2.25
control_n_cells = 64
coarse_n_cells = 0

[persistence]
amplitude_list = 0.2, 0.1
window_r = 0.4

[alternative]
probe_stride = 4
max_probes = 20
r_max = 0.3

[output]
write_fields = false
)";

}  // namespace

TEST_CASE("configuration round-trip reproduces every field") {
  const ExperimentConfig cfg = parse_config(kFullConfig);

  CHECK(cfg.experiment == "counterexample");
  CHECK(cfg.grid.extent == 4.0);
  CHECK(cfg.grid.n_cells == 96);
  CHECK(cfg.grid.center[0] == 0.5);
  CHECK(cfg.grid.center[1] == -0.25);
  CHECK(cfg.coefficients.kind == "counterexample");
  CHECK(cfg.coefficients.a11 == 2.5);
  CHECK(cfg.coefficients.a12 == -0.75);
  CHECK(cfg.coefficients.a22 == 1.25);
  CHECK(cfg.coefficients.phase_speed == 6.0);
  CHECK(cfg.coefficients.junction_index == 3);
  CHECK(cfg.coefficients.value_a == 1.5);
  CHECK(cfg.coefficients.value_b == 4.5);
  CHECK(cfg.boundary.kind == "constant");
  CHECK(cfg.boundary.beta == 0.125);
  CHECK(cfg.boundary.nu_x == 0.6);
  CHECK(cfg.boundary.nu_y == 0.8);
  CHECK(cfg.boundary.datum_coefficient == 2.0);
  CHECK(cfg.boundary.value == 0.4);
  CHECK(cfg.solver.tol == 1e-8);
  CHECK(cfg.penalized.eps_list == std::vector<double>{0.4, 0.2, 0.1});
  CHECK(cfg.penalized.t_steps == 6);
  CHECK(cfg.stability.delta_list == std::vector<double>{0.3, 0.15});
  CHECK(cfg.classify.eps == 0.04);
  CHECK(cfg.classify.r0 == 0.2);
  CHECK(cfg.classify.tau == 0.75);
  CHECK(cfg.blowup.radii == std::vector<double>{0.5, 0.25, 0.125});
  CHECK(cfg.blowup.n_out == 64);
  CHECK(cfg.blowup.out_extent == 1.25);
  CHECK(cfg.blowup.collar_factor == 3.0);
  CHECK(cfg.blowup.beta_lo == -0.05);
  CHECK(cfg.blowup.beta_hi == 0.2);
  CHECK(cfg.blowup.reference_coefficients == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(cfg.counterexample.margin_factor == 1.5);
  CHECK(cfg.counterexample.avg_tol == 0.2);
  CHECK(cfg.counterexample.beta_lo == -0.2);
  CHECK(cfg.counterexample.beta_hi == 0.05);
  CHECK(cfg.counterexample.even_radii == std::vector<double>{0.2, 0.1});
  CHECK(cfg.counterexample.odd_radii == std::vector<double>{0.15, 0.075});
  CHECK(cfg.counterexample.min_gap == 0.001);
  CHECK(cfg.counterexample.control_value == 2.25);
  CHECK(cfg.counterexample.control_n_cells == 64);
  CHECK(cfg.counterexample.coarse_n_cells == 0);
  CHECK(cfg.persistence.amplitude_list == std::vector<double>{0.2, 0.1});
  CHECK(cfg.persistence.window_r == 0.4);
  CHECK(cfg.alternative.probe_stride == 4);
  CHECK(cfg.alternative.max_probes == 20);
  CHECK(cfg.alternative.r_max == 0.3);
  CHECK(cfg.output.write_fields == false);

  // The canonical form is a fixed point: parsing it back changes nothing.
  const std::string canonical = serialize_config(cfg);
  const ExperimentConfig reparsed = parse_config(canonical);
  CHECK(serialize_config(reparsed) == canonical);
  CHECK(reparsed.grid.center[1] == cfg.grid.center[1]);
  CHECK(reparsed.coefficients.a12 == cfg.coefficients.a12);
  CHECK(reparsed.solver.tol == cfg.solver.tol);
  CHECK(reparsed.counterexample.odd_radii == cfg.counterexample.odd_radii);

  SUBCASE("defaults round-trip, including empty lists") {
    const ExperimentConfig defaults{};
    const std::string text = serialize_config(defaults);
    const ExperimentConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.blowup.radii.empty());
    CHECK(back.counterexample.even_radii.empty());
    CHECK(back.experiment == "exact");
    CHECK(back.output.write_fields == true);
  }
}

TEST_CASE("malformed values report the offending line and field") {
  SUBCASE("out-of-range classify threshold") {
    expect_config_error("[classify]\neps = -0.1\n", 2, "classify.eps", "must lie in (0, 1/8)");
  }
  SUBCASE("unknown key in a known section") {
    expect_config_error("[grid]\nspacing = 3\n", 2, "grid.spacing", "unknown key");
  }
  SUBCASE("unknown section") {
    expect_config_error("[turbo]\n", 1, "turbo", "unknown section");
  }
  SUBCASE("unterminated section header") {
    expect_config_error("[grid\n", 1, "(section)", "unterminated section header");
  }
  SUBCASE("value that is not a number") {
    expect_config_error("[grid]\nextent = fast\n", 2, "grid.extent", "expected a number");
  }
  SUBCASE("fractional value where an integer is required") {
    expect_config_error("[grid]\nn_cells = 12.5\n", 2, "grid.n_cells", "expected an integer");
  }
  SUBCASE("grid too coarse") {
    expect_config_error("[grid]\nn_cells = 4\n", 2, "grid.n_cells", "must be at least 8");
  }
  SUBCASE("non-boolean flag") {
    expect_config_error("[output]\nwrite_fields = yes\n", 2, "output.write_fields",
                        "expected true or false");
  }
  SUBCASE("empty list entry") {
    expect_config_error("[penalized]\neps_list = 0.2,,0.1\n", 2, "penalized.eps_list",
                        "empty list entry");
  }
  SUBCASE("missing equals sign") {
    expect_config_error("[grid]\nextent 2\n", 2, "grid", "expected 'key = value'");
  }
  SUBCASE("missing key before equals sign") {
    expect_config_error("[grid]\n= 3\n", 2, "grid", "missing key");
  }
  SUBCASE("key before any section header") {
    expect_config_error("extent = 2\n", 1, "extent", "key outside any section");
  }
  SUBCASE("unknown experiment name") {
    expect_config_error("[experiment]\nname = warp\n", 2, "experiment.name",
                        "unknown experiment");
  }
  SUBCASE("inverted offset bracket is caught after parsing") {
    expect_config_error("[blowup]\nbeta_lo = 0.2\nbeta_hi = 0.1\n", 2, "blowup.beta_lo",
                        "beta_lo < beta_hi");
  }
  SUBCASE("zero boundary normal is caught after parsing") {
    expect_config_error("[boundary]\nnu_x = 0\nnu_y = 0\n", 2, "boundary.nu_x",
                        "must be nonzero");
  }
  SUBCASE("ramp widths must decrease") {
    expect_config_error("[penalized]\neps_list = 0.1, 0.2\n", 2, "penalized.eps_list",
                        "strictly decreasing");
  }
  SUBCASE("comments and blank lines are ignored") {
    const ExperimentConfig cfg =
        parse_config("# leading comment\n\n[grid]  ; trailing\nn_cells = 16  # inline\n");
    CHECK(cfg.grid.n_cells == 16);
  }
}

TEST_CASE("bad invocations exit with status 2") {
  const fs::path dir = scratch_dir("bad_invocations");

  SUBCASE("missing configuration file") {
    CHECK(run({"solve", "--config", (dir / "absent.cfg").string()}) == 2);
  }
  SUBCASE("malformed configuration file") {
    write_text(dir / "bad.cfg", "[classify]\neps = -0.1\n");
    CHECK(run({"solve", "--config", (dir / "bad.cfg").string()}) == 2);
  }
  SUBCASE("unknown subcommand") {
    CHECK(run({"frobnicate", "--config", "x.cfg"}) == 2);
  }
  SUBCASE("no subcommand") { CHECK(run({}) == 2); }
  SUBCASE("missing required --config option") { CHECK(run({"solve"}) == 2); }
}

TEST_CASE("solve writes a manifest whose checksums match the artifacts") {
  const fs::path dir = scratch_dir("solve_manifest");
  const fs::path cfg_path = dir / "solve.cfg";
  write_text(cfg_path,
             "[grid]\n"
             "n_cells = 32\n"
             "[boundary]\n"
             "kind = halfspace\n"
             "beta = 0.3\n"
             "[output]\n"
             "write_fields = true\n");
  const fs::path out = dir / "out";
  const int rc = run({"solve", "--config", cfg_path.string(), "--out", out.string(),
                      "--seedless", "--threads", "2"});
  CHECK(rc == 0);

  REQUIRE(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "report_scalars.csv"));
  CHECK(fs::exists(out / "assertion_report.txt"));

  const nlohmann::json m = nlohmann::json::parse(read_text(out / "manifest.json"));
  CHECK(m.at("command") == "solve");
  CHECK(m.at("all_pass") == true);

  // The echoed configuration is itself canonical.
  const std::string echo = m.at("config").get<std::string>();
  CHECK(serialize_config(parse_config(echo)) == echo);
  CHECK(parse_config(echo).grid.n_cells == 32);

  // Every listed artifact exists and its recorded digest matches the bytes.
  REQUIRE(m.at("files").size() >= 5);
  for (const auto& f : m.at("files")) {
    const fs::path p = out / f.at("name").get<std::string>();
    REQUIRE(fs::exists(p));
    CHECK(fnv1a_hex(p) == f.at("checksum").get<std::string>());
  }

  bool saw_seedless = false, saw_converged = false;
  for (const auto& a : m.at("assertions")) {
    if (a.at("name") == "run.seedless") saw_seedless = a.at("pass").get<bool>();
    if (a.at("name") == "solve.converged") saw_converged = a.at("pass").get<bool>();
  }
  CHECK(saw_seedless);
  CHECK(saw_converged);
}

TEST_CASE("analyze reruns are byte-identical") {
  const fs::path dir = scratch_dir("analyze_rerun");
  const fs::path cfg_path = dir / "analyze.cfg";
  write_text(cfg_path,
             "[grid]\n"
             "n_cells = 64\n"
             "[boundary]\n"
             "kind = halfspace\n"
             "beta = 0.3\n"
             "[output]\n"
             "write_fields = false\n");
  const fs::path out_a = dir / "a";
  const fs::path out_b = dir / "b";
  REQUIRE(run({"analyze", "--config", cfg_path.string(), "--out", out_a.string()}) == 0);
  REQUIRE(run({"analyze", "--config", cfg_path.string(), "--out", out_b.string()}) == 0);

  for (const char* name :
       {"analysis_summary.csv", "analysis_nondegeneracy.csv", "report_scalars.csv"}) {
    REQUIRE(fs::exists(out_a / name));
    REQUIRE(fs::exists(out_b / name));
    CHECK_MESSAGE(fnv1a_hex(out_a / name) == fnv1a_hex(out_b / name),
                  name << " differs between reruns");
  }

  // The manifests agree on every artifact digest (timings aside).
  const nlohmann::json ma = nlohmann::json::parse(read_text(out_a / "manifest.json"));
  const nlohmann::json mb = nlohmann::json::parse(read_text(out_b / "manifest.json"));
  CHECK(ma.at("files") == mb.at("files"));
  CHECK(ma.at("assertions") == mb.at("assertions"));
  CHECK(ma.at("config") == mb.at("config"));
}

TEST_CASE("vmo subcommand reports a constant family as oscillation-free") {
  const fs::path dir = scratch_dir("vmo_constant");
  const fs::path cfg_path = dir / "vmo.cfg";
  write_text(cfg_path,
             "[grid]\n"
             "n_cells = 64\n"
             "[coefficients]\n"
             "kind = constant\n"
             "a11 = 2.0\n"
             "a22 = 2.0\n"
             "[output]\n"
             "write_fields = false\n");
  const fs::path out = dir / "out";
  CHECK(run({"vmo", "--config", cfg_path.string(), "--out", out.string()}) == 0);
  for (const char* name : {"vmo_eta.csv", "vmo_bramanti.csv", "vmo_psi.csv", "vmo_report.json"})
    CHECK(fs::exists(out / name));

  const nlohmann::json report = nlohmann::json::parse(read_text(out / "vmo_report.json"));
  CHECK(report.at("kind") == "constant");
  CHECK(report.at("eta_max").get<double>() == 0.0);
}

TEST_CASE("assertion failures exit with status 1 and leave a diagnosis") {
  const fs::path dir = scratch_dir("blowup_failure");
  const fs::path cfg_path = dir / "blowup.cfg";
  // An offset bracket entirely on one side of the free boundary cannot
  // straddle it, so the pinning bisection must give up.
  write_text(cfg_path,
             "[grid]\n"
             "n_cells = 64\n"
             "[boundary]\n"
             "kind = halfspace\n"
             "beta = 0.3\n"
             "[blowup]\n"
             "beta_lo = 0.5\n"
             "beta_hi = 0.6\n"
             "[output]\n"
             "write_fields = false\n");
  const fs::path out = dir / "out";
  CHECK(run({"blowup", "--config", cfg_path.string(), "--out", out.string()}) == 1);

  REQUIRE(fs::exists(out / "beta_bisection_failure.txt"));
  const std::string diag = read_text(out / "beta_bisection_failure.txt");
  CHECK(contains(diag, "bracket [0.5, 0.59999999999999998]"));

  REQUIRE(fs::exists(out / "assertion_report.txt"));
  const std::string report = read_text(out / "assertion_report.txt");
  CHECK(contains(report, "FAIL blowup.beta_bisection"));

  const nlohmann::json m = nlohmann::json::parse(read_text(out / "manifest.json"));
  CHECK(m.at("all_pass") == false);
}
