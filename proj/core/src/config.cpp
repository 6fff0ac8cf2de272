#include "oblab/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "oblab/io.hpp"

namespace oblab {

ConfigError::ConfigError(int line_number, std::string field_path, const std::string& message)
    : std::runtime_error("config error at line " + std::to_string(line_number) + ", field '" +
                         field_path + "': " + message),
      line(line_number),
      field(std::move(field_path)) {}

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Parser {
  ExperimentConfig cfg;
  int line_no = 0;
  std::string section;
  /// Line where each field was set, for range errors found after parsing.
  std::map<std::string, int> field_lines;

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw ConfigError(line_no, field, message);
  }

  double num(const std::string& field, const std::string& v) {
    try {
      return parse_double(v, field);
    } catch (const std::exception&) {
      fail(field, "expected a number, got '" + v + "'");
    }
  }

  int integer(const std::string& field, const std::string& v) {
    const double d = num(field, v);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) fail(field, "expected an integer, got '" + v + "'");
    return i;
  }

  bool boolean(const std::string& field, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(field, "expected true or false, got '" + v + "'");
  }

  std::vector<double> list(const std::string& field, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(v);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(field, "empty list entry");
      out.push_back(num(field, item));
    }
    return out;
  }

  void positive(const std::string& field, double v) {
    if (!(v > 0.0)) fail(field, "must be positive");
  }

  void handle(const std::string& key, const std::string& value) {
    const std::string field = section + "." + key;
    field_lines[field] = line_no;

    if (section == "experiment") {
      if (key == "name") {
        static const char* names[] = {"exact",          "stability",      "alternative",
                                      "counterexample", "penalized-path", "persistence"};
        for (const char* n : names)
          if (value == n) {
            cfg.experiment = value;
            return;
          }
        fail(field, "unknown experiment '" + value + "'");
      }
      fail(field, "unknown key");
    }

    if (section == "grid") {
      if (key == "extent") {
        cfg.grid.extent = num(field, value);
        positive(field, cfg.grid.extent);
      } else if (key == "n_cells") {
        cfg.grid.n_cells = integer(field, value);
        if (cfg.grid.n_cells < 8) fail(field, "must be at least 8");
      } else if (key == "center_x") {
        cfg.grid.center[0] = num(field, value);
      } else if (key == "center_y") {
        cfg.grid.center[1] = num(field, value);
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "coefficients") {
      if (key == "kind") {
        if (value != "constant" && value != "counterexample" && value != "dyadic-step")
          fail(field, "unknown coefficient kind '" + value + "'");
        cfg.coefficients.kind = value;
      } else if (key == "a11") {
        cfg.coefficients.a11 = num(field, value);
      } else if (key == "a12") {
        cfg.coefficients.a12 = num(field, value);
      } else if (key == "a22") {
        cfg.coefficients.a22 = num(field, value);
      } else if (key == "phase_speed") {
        cfg.coefficients.phase_speed = num(field, value);
        if (!(cfg.coefficients.phase_speed >= 1.0)) fail(field, "must be at least 1");
      } else if (key == "junction_index") {
        cfg.coefficients.junction_index = integer(field, value);
        if (cfg.coefficients.junction_index < 1 || cfg.coefficients.junction_index % 2 == 0)
          fail(field, "must be an odd positive integer");
      } else if (key == "value_a") {
        cfg.coefficients.value_a = num(field, value);
        positive(field, cfg.coefficients.value_a);
      } else if (key == "value_b") {
        cfg.coefficients.value_b = num(field, value);
        positive(field, cfg.coefficients.value_b);
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "boundary") {
      if (key == "kind") {
        if (value != "halfspace" && value != "constant" && value != "zero")
          fail(field, "unknown boundary kind '" + value + "'");
        cfg.boundary.kind = value;
      } else if (key == "beta") {
        cfg.boundary.beta = num(field, value);
      } else if (key == "nu_x") {
        cfg.boundary.nu_x = num(field, value);
      } else if (key == "nu_y") {
        cfg.boundary.nu_y = num(field, value);
      } else if (key == "datum_coefficient") {
        cfg.boundary.datum_coefficient = num(field, value);
        if (cfg.boundary.datum_coefficient < 0.0) fail(field, "must be nonnegative");
      } else if (key == "value") {
        cfg.boundary.value = num(field, value);
        if (cfg.boundary.value < 0.0) fail(field, "must be nonnegative");
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "solver") {
      if (key == "tol") {
        cfg.solver.tol = num(field, value);
        positive(field, cfg.solver.tol);
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "penalized") {
      if (key == "eps_list") {
        cfg.penalized.eps_list = list(field, value);
        for (const double e : cfg.penalized.eps_list) positive(field, e);
      } else if (key == "t_steps") {
        cfg.penalized.t_steps = integer(field, value);
        if (cfg.penalized.t_steps < 1) fail(field, "must be at least 1");
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "stability") {
      if (key == "delta_list") {
        cfg.stability.delta_list = list(field, value);
        for (const double d : cfg.stability.delta_list)
          if (d < 0.0) fail(field, "perturbation sizes must be nonnegative");
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "classify") {
      if (key == "eps") {
        cfg.classify.eps = num(field, value);
        if (!(cfg.classify.eps > 0.0 && cfg.classify.eps < 0.125))
          fail(field, "must lie in (0, 1/8)");
      } else if (key == "r0") {
        cfg.classify.r0 = num(field, value);
        positive(field, cfg.classify.r0);
      } else if (key == "tau") {
        cfg.classify.tau = num(field, value);
        if (!(cfg.classify.tau > 0.0 && cfg.classify.tau <= 1.0))
          fail(field, "must lie in (0, 1]");
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "blowup") {
      if (key == "radii") {
        cfg.blowup.radii = list(field, value);
        for (const double r : cfg.blowup.radii) positive(field, r);
      } else if (key == "n_out") {
        cfg.blowup.n_out = integer(field, value);
        if (cfg.blowup.n_out < 8) fail(field, "must be at least 8");
      } else if (key == "out_extent") {
        cfg.blowup.out_extent = num(field, value);
        positive(field, cfg.blowup.out_extent);
      } else if (key == "collar_factor") {
        cfg.blowup.collar_factor = num(field, value);
        positive(field, cfg.blowup.collar_factor);
      } else if (key == "beta_lo") {
        cfg.blowup.beta_lo = num(field, value);
      } else if (key == "beta_hi") {
        cfg.blowup.beta_hi = num(field, value);
      } else if (key == "reference_coefficients") {
        cfg.blowup.reference_coefficients = list(field, value);
        for (const double c : cfg.blowup.reference_coefficients) positive(field, c);
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "counterexample") {
      if (key == "margin_factor") {
        cfg.counterexample.margin_factor = num(field, value);
        if (!(cfg.counterexample.margin_factor >= 1.0)) fail(field, "must be at least 1");
      } else if (key == "avg_tol") {
        cfg.counterexample.avg_tol = num(field, value);
        positive(field, cfg.counterexample.avg_tol);
      } else if (key == "beta_lo") {
        cfg.counterexample.beta_lo = num(field, value);
      } else if (key == "beta_hi") {
        cfg.counterexample.beta_hi = num(field, value);
      } else if (key == "even_radii") {
        cfg.counterexample.even_radii = list(field, value);
        for (const double r : cfg.counterexample.even_radii) positive(field, r);
      } else if (key == "odd_radii") {
        cfg.counterexample.odd_radii = list(field, value);
        for (const double r : cfg.counterexample.odd_radii) positive(field, r);
      } else if (key == "min_gap") {
        cfg.counterexample.min_gap = num(field, value);
        positive(field, cfg.counterexample.min_gap);
      } else if (key == "control_value") {
        cfg.counterexample.control_value = num(field, value);
        positive(field, cfg.counterexample.control_value);
      } else if (key == "control_n_cells") {
        cfg.counterexample.control_n_cells = integer(field, value);
        if (cfg.counterexample.control_n_cells < 8) fail(field, "must be at least 8");
      } else if (key == "coarse_n_cells") {
        cfg.counterexample.coarse_n_cells = integer(field, value);
        if (cfg.counterexample.coarse_n_cells != 0 && cfg.counterexample.coarse_n_cells < 8)
          fail(field, "must be 0 (disabled) or at least 8");
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "persistence") {
      if (key == "amplitude_list") {
        cfg.persistence.amplitude_list = list(field, value);
        for (const double a : cfg.persistence.amplitude_list)
          if (a < 0.0 || a >= 1.0) fail(field, "amplitudes must lie in [0, 1)");
      } else if (key == "window_r") {
        cfg.persistence.window_r = num(field, value);
        positive(field, cfg.persistence.window_r);
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "alternative") {
      if (key == "probe_stride") {
        cfg.alternative.probe_stride = integer(field, value);
        if (cfg.alternative.probe_stride < 1) fail(field, "must be at least 1");
      } else if (key == "max_probes") {
        cfg.alternative.max_probes = integer(field, value);
        if (cfg.alternative.max_probes < 1) fail(field, "must be at least 1");
      } else if (key == "r_max") {
        cfg.alternative.r_max = num(field, value);
        positive(field, cfg.alternative.r_max);
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    if (section == "output") {
      if (key == "write_fields") {
        cfg.output.write_fields = boolean(field, value);
      } else {
        fail(field, "unknown key");
      }
      return;
    }

    fail(section.empty() ? key : section, "unknown section");
  }

  int line_of(const std::string& field) const {
    const auto it = field_lines.find(field);
    return it == field_lines.end() ? 0 : it->second;
  }

  void cross_validate() {
    if (!(cfg.counterexample.beta_lo < cfg.counterexample.beta_hi))
      throw ConfigError(line_of("counterexample.beta_lo"), "counterexample.beta_lo",
                        "bracket must satisfy beta_lo < beta_hi");
    if (!(cfg.blowup.beta_lo < cfg.blowup.beta_hi))
      throw ConfigError(line_of("blowup.beta_lo"), "blowup.beta_lo",
                        "bracket must satisfy beta_lo < beta_hi");
    if (cfg.boundary.nu_x == 0.0 && cfg.boundary.nu_y == 0.0)
      throw ConfigError(line_of("boundary.nu_x"), "boundary.nu_x",
                        "normal direction must be nonzero");
    for (std::size_t k = 1; k < cfg.stability.delta_list.size(); ++k)
      if (!(cfg.stability.delta_list[k] < cfg.stability.delta_list[k - 1]))
        throw ConfigError(line_of("stability.delta_list"), "stability.delta_list",
                          "perturbation sizes must be strictly decreasing");
    for (std::size_t k = 1; k < cfg.penalized.eps_list.size(); ++k)
      if (!(cfg.penalized.eps_list[k] < cfg.penalized.eps_list[k - 1]))
        throw ConfigError(line_of("penalized.eps_list"), "penalized.eps_list",
                          "ramp widths must be strictly decreasing");
    for (std::size_t k = 1; k < cfg.blowup.radii.size(); ++k)
      if (!(cfg.blowup.radii[k] < cfg.blowup.radii[k - 1]))
        throw ConfigError(line_of("blowup.radii"), "blowup.radii",
                          "radii must be strictly decreasing");
  }
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Parser parser;
  std::stringstream ss(text);
  std::string raw;
  while (std::getline(ss, raw)) {
    ++parser.line_no;
    const std::size_t comment = raw.find_first_of("#;");
    if (comment != std::string::npos) raw = raw.substr(0, comment);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(parser.line_no, "(section)", "unterminated section header");
      parser.section = trim(line.substr(1, line.size() - 2));
      static const char* sections[] = {"experiment", "grid",       "coefficients", "boundary",
                                       "solver",     "penalized",  "stability",    "classify",
                                       "blowup",     "counterexample", "persistence",
                                       "alternative", "output"};
      bool known = false;
      for (const char* s : sections) known = known || parser.section == s;
      if (!known)
        throw ConfigError(parser.line_no, parser.section, "unknown section");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(parser.line_no, parser.section.empty() ? "(top)" : parser.section,
                        "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(parser.line_no, parser.section, "missing key before '='");
    if (parser.section.empty())
      throw ConfigError(parser.line_no, key, "key outside any section");
    parser.handle(key, value);
  }
  parser.cross_validate();
  return parser.cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "config", "cannot open configuration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ", ";
    out += format_double(values[k]);
  }
  return out;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& c) {
  std::string s;
  auto kv = [&](const char* key, const std::string& value) {
    s += key;
    s += " = ";
    s += value;
    s += "\n";
  };
  auto kvd = [&](const char* key, double v) { kv(key, format_double(v)); };
  auto kvi = [&](const char* key, int v) { kv(key, std::to_string(v)); };

  s += "[experiment]\n";
  kv("name", c.experiment);
  s += "\n[grid]\n";
  kvd("extent", c.grid.extent);
  kvi("n_cells", c.grid.n_cells);
  kvd("center_x", c.grid.center[0]);
  kvd("center_y", c.grid.center[1]);
  s += "\n[coefficients]\n";
  kv("kind", c.coefficients.kind);
  kvd("a11", c.coefficients.a11);
  kvd("a12", c.coefficients.a12);
  kvd("a22", c.coefficients.a22);
  kvd("phase_speed", c.coefficients.phase_speed);
  kvi("junction_index", c.coefficients.junction_index);
  kvd("value_a", c.coefficients.value_a);
  kvd("value_b", c.coefficients.value_b);
  s += "\n[boundary]\n";
  kv("kind", c.boundary.kind);
  kvd("beta", c.boundary.beta);
  kvd("nu_x", c.boundary.nu_x);
  kvd("nu_y", c.boundary.nu_y);
  kvd("datum_coefficient", c.boundary.datum_coefficient);
  kvd("value", c.boundary.value);
  s += "\n[solver]\n";
  kvd("tol", c.solver.tol);
  s += "\n[penalized]\n";
  kv("eps_list", join(c.penalized.eps_list));
  kvi("t_steps", c.penalized.t_steps);
  s += "\n[stability]\n";
  kv("delta_list", join(c.stability.delta_list));
  s += "\n[classify]\n";
  kvd("eps", c.classify.eps);
  kvd("r0", c.classify.r0);
  kvd("tau", c.classify.tau);
  s += "\n[blowup]\n";
  kv("radii", join(c.blowup.radii));
  kvi("n_out", c.blowup.n_out);
  kvd("out_extent", c.blowup.out_extent);
  kvd("collar_factor", c.blowup.collar_factor);
  kvd("beta_lo", c.blowup.beta_lo);
  kvd("beta_hi", c.blowup.beta_hi);
  kv("reference_coefficients", join(c.blowup.reference_coefficients));
  s += "\n[counterexample]\n";
  kvd("margin_factor", c.counterexample.margin_factor);
  kvd("avg_tol", c.counterexample.avg_tol);
  kvd("beta_lo", c.counterexample.beta_lo);
  kvd("beta_hi", c.counterexample.beta_hi);
  kv("even_radii", join(c.counterexample.even_radii));
  kv("odd_radii", join(c.counterexample.odd_radii));
  kvd("min_gap", c.counterexample.min_gap);
  kvd("control_value", c.counterexample.control_value);
  kvi("control_n_cells", c.counterexample.control_n_cells);
  kvi("coarse_n_cells", c.counterexample.coarse_n_cells);
  s += "\n[persistence]\n";
  kv("amplitude_list", join(c.persistence.amplitude_list));
  kvd("window_r", c.persistence.window_r);
  s += "\n[alternative]\n";
  kvi("probe_stride", c.alternative.probe_stride);
  kvi("max_probes", c.alternative.max_probes);
  kvd("r_max", c.alternative.r_max);
  s += "\n[output]\n";
  kv("write_fields", c.output.write_fields ? "true" : "false");
  return s;
}

}  // namespace oblab
