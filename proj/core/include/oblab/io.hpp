#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oblab/grid.hpp"

namespace oblab {

/// Formats a double with 17 significant digits ("%.17g"), enough to
/// round-trip any IEEE double exactly. All persisted numbers use this.
std::string format_double(double v);

/// Parses a double; throws on malformed input.
double parse_double(const std::string& s, const std::string& context);

/// Field file layout: three header lines
///   extent <e>
///   n_cells <n>
///   center <cx> <cy>
/// followed by n*n values, one per line, row-major. Round-trips losslessly.
void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(const std::filesystem::path& path);

/// Same header; one 0/1 per line.
void write_cellset(const std::filesystem::path& path, const CellSet& cells);
CellSet read_cellset(const std::filesystem::path& path);

/// Streams CSV rows with the fixed float format. The writer owns the file;
/// rows appear in call order so reruns are byte-identical.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& cells);
  ~CsvWriter();

 private:
  std::string buffer_;
  std::filesystem::path path_;
  size_t n_columns_;
};

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string fnv1a_hex(const std::filesystem::path& path);

}  // namespace oblab
