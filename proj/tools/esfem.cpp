#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "esfem/config.hpp"

namespace {

const char* describe(const std::string& study) {
  if (study == "convergence") return "space-time error table for the evolving-surface heat problem";
  if (study == "ritz") return "Ritz projection and material-derivative error rates";
  if (study == "maxprinciple") return "maximum-norm stability growth factors over mesh levels";
  if (study == "geometry") return "surface approximation rates and bilinear-form consistency gaps";
  if (study == "l2decay") return "exponential interior decay of a local L2 projection";
  return "write one mesh level as an OFF file with an admissibility report";
}

void addRunOptions(CLI::App& sub, esfem::RunConfig& config, std::string& levelsText,
                   std::string& configFile) {
  // Config-file keys are injected as flags ahead of the explicit ones, so
  // every option takes the last value given.
  const auto add = [&sub](const std::string& name, auto& target, const std::string& help) {
    sub.add_option(name, target, help)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };
  add("--levels", levelsText, "ascending range 'a..b' or comma list '1,2,3'");
  add("--tau", config.tau, "time step (0 keeps the study default)");
  add("--bdf", config.order, "BDF order 1..4 (0 keeps the study default)");
  add("--gamma", config.gamma, "weight exponent; 0 keeps the sweep {0.1, 1, 10}");
  add("--t-end", config.tEnd, "final time (0 keeps the study default)");
  add("--time", config.time, "evaluation time (geometry forms, l2decay, mesh-export)");
  add("--surface", config.surface, "surface problem name");
  add("--initial", config.initialData, "initial data: interpolant or ritz");
  add("--out", config.outDir, "output directory for CSV tables and the manifest");
  add("--seed", config.seed, "random seed");
  add("--threads", config.threads, "worker threads; 0 = available cores");
  add("--config", configFile, "key = value file mirroring the flags; flags override it");
}

// Splices the config file's pairs in as flags right after the subcommand, so
// the explicit flags behind them take precedence. Unknown keys then fail the
// parse exactly like unknown flags.
std::vector<std::string> withConfigArgs(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args.front().empty() || args.front().front() == '-') return args;
  std::string file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
    }
  }
  if (file.empty()) return args;
  std::vector<std::string> expanded = {args.front()};
  for (const auto& [key, value] : esfem::readConfigPairs(file)) {
    expanded.push_back("--" + key);
    expanded.push_back(value);
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

int runSelected(const CLI::App& app, esfem::RunConfig config, const std::string& levelsText) {
  const CLI::App* sub = app.get_subcommands().front();
  config.study = sub->get_name();
  if (sub->count("--levels") > 0) config.levels = esfem::parseLevels(levelsText);
  config.timeSet = sub->count("--time") > 0;
  const esfem::StudyReport report = esfem::runStudy(config);
  int passed = 0;
  for (const esfem::CriterionResult& criterion : report.criteria) {
    passed += criterion.pass ? 1 : 0;
    std::printf("%s %s: measured=%.6g band=[%g, %g]\n", criterion.pass ? "PASS" : "FAIL",
                criterion.name.c_str(), criterion.measured, criterion.lower, criterion.upper);
  }
  std::printf("%s: %d/%zu criteria passed; outputs in %s\n", report.study.c_str(), passed,
              report.criteria.size(), config.outDir.c_str());
  return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evolving-surface finite element studies"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  esfem::RunConfig config;
  std::string levelsText;
  std::string configFile;
  for (const std::string& name : esfem::studyNames()) {
    addRunOptions(*app.add_subcommand(name, describe(name)), config, levelsText,
                  configFile);
  }
  std::vector<std::string> args;
  try {
    args = withConfigArgs(argc, argv);
  } catch (const esfem::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  }
  std::reverse(args.begin(), args.end());  // CLI11 consumes args back to front
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return runSelected(app, config, levelsText);
  } catch (const esfem::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const esfem::DomainError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
