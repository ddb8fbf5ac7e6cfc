#include "esfem/config.hpp"

#include <charconv>
#include <fstream>

#include "esfem/parallel.hpp"

namespace esfem {

namespace {

std::string trimmed(const std::string& text) {
  const std::size_t first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const std::size_t last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

int parseLevelToken(const std::string& token) {
  int value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ValidationError("levels: '" + token + "' is not an integer");
  }
  return value;
}

}  // namespace

std::vector<int> parseLevels(const std::string& text) {
  if (text.empty()) throw ValidationError("levels: empty specification");
  std::vector<int> levels;
  const std::size_t range = text.find("..");
  if (range != std::string::npos) {
    const int first = parseLevelToken(text.substr(0, range));
    const int last = parseLevelToken(text.substr(range + 2));
    if (last < first) throw ValidationError("levels: descending range");
    for (int level = first; level <= last; ++level) levels.push_back(level);
    return levels;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    levels.push_back(parseLevelToken(text.substr(start, end - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return levels;
}

const std::vector<std::string>& studyNames() {
  static const std::vector<std::string> names = {
      "convergence", "ritz", "maxprinciple", "geometry", "l2decay", "mesh-export"};
  return names;
}

std::vector<std::pair<std::string, std::string>> readConfigPairs(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read " + path.string());
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int lineNumber = 0;
  while (std::getline(in, line)) {
    ++lineNumber;
    const std::string text = trimmed(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t eq = text.find('=');
    const std::string key = eq == std::string::npos ? "" : trimmed(text.substr(0, eq));
    if (key.empty()) {
      throw ValidationError("config: line " + std::to_string(lineNumber) +
                            " is not 'key = value'");
    }
    if (key == "config") {
      throw ValidationError("config: nested config files are not allowed (line " +
                            std::to_string(lineNumber) + ")");
    }
    pairs.emplace_back(key, trimmed(text.substr(eq + 1)));
  }
  return pairs;
}

StudyReport runStudy(const RunConfig& config) {
  if (config.gamma < 0) throw ValidationError("gamma must be nonnegative");
  const int threads = resolveThreads(config.threads);
  StudyReport report;
  if (config.study == "convergence") {
    ConvergenceOptions o;
    o.surfaceName = config.surface;
    if (!config.levels.empty()) o.levels = config.levels;
    if (config.tau != 0) o.tau = config.tau;
    if (config.order != 0) o.order = config.order;
    if (config.tEnd != 0) o.tEnd = config.tEnd;
    o.initialData = config.initialData;
    o.threads = threads;
    report = runConvergence(o);
  } else if (config.study == "ritz") {
    RitzStudyOptions o;
    o.surfaceName = config.surface;
    if (!config.levels.empty()) o.levels = config.levels;
    if (config.timeSet) o.times = {config.time};
    if (config.gamma > 0) o.gammas = {config.gamma};
    o.threads = threads;
    report = runRitzStudy(o);
  } else if (config.study == "maxprinciple") {
    MaxPrincipleOptions o;
    o.surfaceName = config.surface;
    if (!config.levels.empty()) o.levels = config.levels;
    if (config.tau != 0) o.tau = config.tau;
    if (config.order != 0) o.order = config.order;
    if (config.tEnd != 0) o.tEnd = config.tEnd;
    o.seed = config.seed;
    o.threads = threads;
    report = runMaxPrinciple(o);
  } else if (config.study == "geometry") {
    GeometryOptions o;
    o.surfaceNames = {config.surface};
    if (!config.levels.empty()) o.levels = config.levels;
    if (config.timeSet) o.formTime = config.time;
    o.seed = config.seed;
    o.threads = threads;
    report = runGeometryChecks(o);
  } else if (config.study == "l2decay") {
    L2DecayOptions o;
    o.surfaceName = config.surface;
    if (config.levels.size() > 1) {
      throw ValidationError("l2decay: takes a single level");
    }
    if (!config.levels.empty()) o.level = config.levels.front();
    if (config.timeSet) o.time = config.time;
    report = runL2Decay(o);
  } else if (config.study == "mesh-export") {
    MeshExportOptions o;
    o.surfaceName = config.surface;
    if (config.levels.size() > 1) {
      throw ValidationError("mesh-export: takes a single level");
    }
    if (!config.levels.empty()) o.level = config.levels.front();
    if (config.timeSet) o.time = config.time;
    o.outDir = config.outDir;
    report = runMeshExport(o);
  } else {
    throw ValidationError("unknown study '" + config.study + "'");
  }
  writeStudyOutputs(config.outDir, report);
  return report;
}

}  // namespace esfem
