#include "oblab/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "oblab/io.hpp"

namespace oblab {

void RunManifest::add_file(const std::filesystem::path& out_dir,
                           const std::filesystem::path& file) {
  files.push_back(
      {std::filesystem::relative(file, out_dir).generic_string(), fnv1a_hex(file)});
}

bool RunManifest::all_pass() const { return failure_count() == 0; }

long RunManifest::failure_count() const {
  long n = 0;
  for (const Assertion& a : assertions)
    if (!a.pass) ++n;
  return n;
}

std::string code_version_stamp() { return "oblab 0.1.0"; }

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["code_version"] = m.code_version;
  j["config"] = m.config_echo;
  j["files"] = nlohmann::json::array();
  for (const ManifestFile& f : m.files)
    j["files"].push_back({{"name", f.name}, {"checksum", f.checksum}});
  j["stages"] = nlohmann::json::array();
  for (const StageTiming& s : m.stages)
    j["stages"].push_back({{"name", s.name}, {"seconds", s.seconds}});
  j["assertions"] = nlohmann::json::array();
  for (const Assertion& a : m.assertions)
    j["assertions"].push_back(
        {{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  j["all_pass"] = m.all_pass();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << j.dump(2) << "\n";
}

std::filesystem::path write_assertion_report(
    const std::filesystem::path& out_dir,
    const std::vector<Assertion>& assertions) {
  const std::filesystem::path path = out_dir / "assertion_report.txt";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  for (const Assertion& a : assertions)
    if (!a.pass) out << "FAIL " << a.name << ": " << a.detail << "\n";
  for (const Assertion& a : assertions)
    if (a.pass) out << "pass " << a.name << ": " << a.detail << "\n";
  return path;
}

StageTimer::StageTimer(RunManifest& manifest, std::string name)
    : manifest_(manifest),
      name_(std::move(name)),
      start_(std::chrono::steady_clock::now()) {}

StageTimer::~StageTimer() {
  const auto elapsed = std::chrono::steady_clock::now() - start_;
  manifest_.stages.push_back(
      {name_, std::chrono::duration<double>(elapsed).count()});
}

}  // namespace oblab
