#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "esfem/experiments.hpp"

namespace esfem {

// One CLI/config-file run: a study plus the knobs shared across studies.
// Empty `levels` selects the study's default level set.
struct RunConfig {
  std::string study;
  std::string surface = "ellipsoid-§7";
  std::vector<int> levels;
  double tau = 0.0;    // 0 keeps the study default
  int order = 0;       // 0 keeps the study default
  double gamma = 0.0;  // 0 keeps the default gamma sweep
  double tEnd = 0.0;   // 0 keeps the study default
  double time = 0.0;   // evaluation time (geometry form time, export, decay)
  bool timeSet = false;
  std::string initialData = "interpolant";
  std::uint64_t seed = 1;
  int threads = 0;  // 0 resolves to the hardware count
  std::string outDir = "out";
};

// Level-list syntax: "a..b" (inclusive ascending range) or a comma list
// "1,2,3". Throws ValidationError for malformed input.
std::vector<int> parseLevels(const std::string& text);

// Reads a run configuration file: one `key = value` per line where the keys
// mirror the CLI flags (levels, tau, bdf, ...); blank lines and lines
// starting with # are skipped. Returns the pairs in file order without
// validating the keys. Throws ValidationError for unreadable files,
// lines without '=', and the key "config" (no nesting).
std::vector<std::pair<std::string, std::string>> readConfigPairs(
    const std::filesystem::path& path);

// Names accepted as RunConfig::study.
const std::vector<std::string>& studyNames();

// Runs the configured study and writes its tables and manifest under
// config.outDir. Throws ValidationError for unknown studies or invalid
// parameter combinations.
StudyReport runStudy(const RunConfig& config);

}  // namespace esfem
