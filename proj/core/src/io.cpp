#include "oblab/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oblab {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  // strtod instead of stod: stod throws out_of_range for subnormals, which
  // must parse to keep the 17-digit text round-trip lossless.
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin)
    throw std::invalid_argument(context + ": expected a number, got '" + s + "'");
  while (*end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (*end != '\0')
    throw std::invalid_argument(context + ": trailing characters in '" + s + "'");
  if (!std::isfinite(v))
    throw std::invalid_argument(context + ": value out of range in '" + s + "'");
  return v;
}

namespace {

void write_header(std::ostream& out, const Grid& g) {
  out << "extent " << format_double(g.extent) << "\n";
  out << "n_cells " << g.n_cells << "\n";
  out << "center " << format_double(g.center[0]) << " "
      << format_double(g.center[1]) << "\n";
}

Grid read_header(std::istream& in, const std::filesystem::path& path) {
  std::string key;
  double extent = 0;
  int n_cells = 0;
  Point center{};
  in >> key >> extent;
  if (key != "extent" || !in) {
    throw std::runtime_error(path.string() + ": bad field header (extent)");
  }
  in >> key >> n_cells;
  if (key != "n_cells" || !in) {
    throw std::runtime_error(path.string() + ": bad field header (n_cells)");
  }
  in >> key >> center[0] >> center[1];
  if (key != "center" || !in) {
    throw std::runtime_error(path.string() + ": bad field header (center)");
  }
  return build_grid(extent, n_cells, center);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
  return in;
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out = open_out(path);
  write_header(out, field.grid);
  for (double v : field.values) out << format_double(v) << "\n";
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  Grid g = read_header(in, path);
  ScalarField field = ScalarField::zeros(g);
  for (size_t k = 0; k < field.values.size(); ++k) {
    if (!(in >> field.values[k])) {
      throw std::runtime_error(path.string() + ": truncated value section");
    }
  }
  require_finite(field, "read_field");
  return field;
}

void write_cellset(const std::filesystem::path& path, const CellSet& cells) {
  std::ofstream out = open_out(path);
  write_header(out, cells.grid);
  for (std::uint8_t m : cells.mask) out << (m ? 1 : 0) << "\n";
}

CellSet read_cellset(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  Grid g = read_header(in, path);
  CellSet cells = CellSet::empty(g);
  for (size_t k = 0; k < cells.mask.size(); ++k) {
    int v = 0;
    if (!(in >> v) || (v != 0 && v != 1)) {
      throw std::runtime_error(path.string() + ": bad mask entry");
    }
    cells.mask[k] = static_cast<std::uint8_t>(v);
  }
  return cells;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns)
    : path_(path), n_columns_(columns.size()) {
  for (size_t k = 0; k < columns.size(); ++k) {
    if (k) buffer_ += ",";
    buffer_ += columns[k];
  }
  buffer_ += "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_columns_) {
    throw std::invalid_argument("CsvWriter: row width mismatch");
  }
  for (size_t k = 0; k < values.size(); ++k) {
    if (k) buffer_ += ",";
    buffer_ += format_double(values[k]);
  }
  buffer_ += "\n";
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_) {
    throw std::invalid_argument("CsvWriter: row width mismatch");
  }
  for (size_t k = 0; k < cells.size(); ++k) {
    if (k) buffer_ += ",";
    buffer_ += cells[k];
  }
  buffer_ += "\n";
}

CsvWriter::~CsvWriter() {
  std::ofstream out(path_);
  if (out) out << buffer_;
}

std::string fnv1a_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for hashing: " + path.string());
  }
  std::uint64_t hash = 14695981039346656037ull;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace oblab
