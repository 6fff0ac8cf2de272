#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace oblab {

/// One named pass/fail check with a human-readable detail line.
struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

struct ManifestFile {
  std::string name;      ///< Path relative to the output directory.
  std::string checksum;  ///< FNV-1a 64-bit digest, 16 hex chars.
};

/// Record of one CLI run: the canonical config echo, every emitted file with
/// its checksum, wall-clock per stage, and the assertion outcomes. Checksums
/// of data artifacts are stable across reruns with identical config; the
/// timing block is informational and deliberately kept out of every CSV.
struct RunManifest {
  std::string command;
  std::string code_version;
  std::string config_echo;
  std::vector<ManifestFile> files;
  std::vector<StageTiming> stages;
  std::vector<Assertion> assertions;

  /// Checksums the file and records it under its path relative to out_dir.
  void add_file(const std::filesystem::path& out_dir,
                const std::filesystem::path& file);
  bool all_pass() const;
  long failure_count() const;
};

/// Version stamp embedded in every manifest.
std::string code_version_stamp();

/// Serializes the manifest as JSON.
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

/// Plain-text list of assertion outcomes, failures first. Returns the path
/// it wrote, which the CLI prints when exiting with status 1.
std::filesystem::path write_assertion_report(
    const std::filesystem::path& out_dir,
    const std::vector<Assertion>& assertions);

/// RAII wall-clock timer; appends one StageTiming on destruction.
class StageTimer {
 public:
  StageTimer(RunManifest& manifest, std::string name);
  ~StageTimer();
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  RunManifest& manifest_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace oblab
