#include "esfem/experiments.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "esfem/types.hpp"

namespace {

using namespace esfem;
namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string readAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path freshDir(const std::string& name) {
  const fs::path dir = fs::path("test_out_experiments") / name;
  fs::remove_all(dir);
  return dir;
}

TEST_SUITE("experiments") {

TEST_CASE("eoc matches the halving examples and is antisymmetric") {
  CHECK(computeEoc(4.0, 1.0, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(computeEoc(0.00918195, 0.00308305, 1.0, 0.5) ==
        doctest::Approx(1.57).epsilon(0.005));
  CHECK(computeEoc(0.01481673, 0.00851267, 1.0, 0.5) ==
        doctest::Approx(0.80).epsilon(0.005));

  const double forward = computeEoc(0.37, 0.11, 0.8, 0.45);
  CHECK(computeEoc(0.11, 0.37, 0.8, 0.45) == doctest::Approx(-forward).epsilon(1e-14));
  CHECK(computeEoc(0.37, 0.11, 0.45, 0.8) == doctest::Approx(-forward).epsilon(1e-14));

  CHECK_THROWS_AS(computeEoc(0.0, 1.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(computeEoc(1.0, -2.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(computeEoc(1.0, 0.5, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(computeEoc(1.0, 0.5, -1.0, 0.5), DomainError);
}

TEST_CASE("eoc sequences pair consecutive rows") {
  const std::vector<double> eocs = computeEocs({16.0, 4.0, 1.0}, {1.0, 0.5, 0.25});
  REQUIRE(eocs.size() == 2);
  CHECK(eocs[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(eocs[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(computeEocs({3.0}, {1.0}).empty());
  CHECK_THROWS_AS(computeEocs({1.0, 2.0}, {1.0}), DomainError);
}

TEST_CASE("line fit recovers exact lines and flags degenerate input") {
  const LineFit exact = fitLine({0.0, 1.0, 2.0, 3.0}, {3.0, 1.0, -1.0, -3.0});
  CHECK(exact.slope == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(exact.intercept == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(exact.rSquared == doctest::Approx(1.0).epsilon(1e-14));

  const LineFit flat = fitLine({0.0, 1.0, 2.0}, {5.0, 5.0, 5.0});
  CHECK(flat.slope == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(flat.rSquared == doctest::Approx(1.0).epsilon(1e-14));

  const LineFit noisy = fitLine({0.0, 1.0, 2.0, 3.0}, {0.1, 0.9, 2.2, 2.8});
  CHECK(noisy.rSquared < 1.0);
  CHECK(noisy.rSquared > 0.9);

  CHECK_THROWS_AS(fitLine({1.0}, {1.0}), DomainError);
  CHECK_THROWS_AS(fitLine({1.0, 1.0}, {1.0, 2.0}), DomainError);
  CHECK_THROWS_AS(fitLine({1.0, 2.0}, {1.0}), DomainError);
}

TEST_CASE("criteria require finite values inside the band") {
  CHECK(makeCriterion("a", 1.5, 1.0, 2.0).pass);
  CHECK(makeCriterion("b", 1.0, 1.0, 2.0).pass);
  CHECK_FALSE(makeCriterion("c", 2.5, 1.0, 2.0).pass);
  CHECK_FALSE(makeCriterion("d", kNan, 1.0, 2.0).pass);
  CHECK_FALSE(makeCriterion("e", kInf, 1.0, kInf).pass);

  StudyReport report;
  CHECK(report.pass());
  report.criteria.push_back(makeCriterion("ok", 1.0, 0.0, 2.0));
  CHECK(report.pass());
  report.criteria.push_back(makeCriterion("bad", 3.0, 0.0, 2.0));
  CHECK_FALSE(report.pass());
}

TEST_CASE("csv cells round-trip doubles and blank out nan") {
  CHECK(csvCell(0.5) == "0.5");
  CHECK(csvCell(kNan).empty());
  CHECK(csvCell(42) == "42");
  CHECK(csvCell(-7) == "-7");
  const double third = 1.0 / 3.0;
  CHECK(std::strtod(csvCell(third).c_str(), nullptr) == third);
  const double tiny = 6.6260701499999999e-34;
  CHECK(std::strtod(csvCell(tiny).c_str(), nullptr) == tiny);
}

TEST_CASE("csv writer emits header plus one line per row") {
  StudyTable table;
  table.name = "toy";
  table.columns = {"a", "b"};
  table.rows = {{"1", "2.5"}, {"3", ""}};
  const fs::path dir = freshDir("csv");
  writeCsv(dir, table);
  CHECK(readAll(dir / "toy.csv") == "a,b\n1,2.5\n3,\n");
}

TEST_CASE("manifest serializes bands, omits infinite bounds, nulls nan") {
  StudyReport report;
  report.study = "toy";
  report.criteria.push_back(makeCriterion("inside", 1.0, 0.5, 2.0));
  report.criteria.push_back(makeCriterion("unmeasured", kNan, 0.0, 1.0));
  report.criteria.push_back(makeCriterion("one-sided", 3.0, 1.0, kInf));
  const fs::path dir = freshDir("manifest");
  writeManifest(dir, {report});

  std::ifstream in(dir / "manifest.json");
  const nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j["pass"] == false);
  REQUIRE(j["studies"].size() == 1);
  const auto& study = j["studies"][0];
  CHECK(study["study"] == "toy");
  CHECK(study["pass"] == false);
  REQUIRE(study["criteria"].size() == 3);
  CHECK(study["criteria"][0]["name"] == "inside");
  CHECK(study["criteria"][0]["measured"] == 1.0);
  CHECK(study["criteria"][0]["lower"] == 0.5);
  CHECK(study["criteria"][0]["upper"] == 2.0);
  CHECK(study["criteria"][0]["pass"] == true);
  CHECK(study["criteria"][1]["measured"].is_null());
  CHECK_FALSE(study["criteria"][2].contains("upper"));
  CHECK(study["criteria"][2]["pass"] == true);
}

TEST_CASE("single-level convergence reports finite errors and a trajectory") {
  ConvergenceOptions o;
  o.levels = {1};
  o.tau = 1e-3;
  o.order = 2;
  o.tEnd = 0.02;
  const StudyReport report = runConvergence(o);
  CHECK(report.study == "convergence");
  REQUIRE(report.criteria.size() == 1);
  CHECK(report.criteria[0].name == "errors-finite");
  CHECK(report.criteria[0].pass);

  REQUIRE(report.tables.size() == 2);
  const StudyTable& table = report.tables[0];
  CHECK(table.name == "convergence");
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][1] == "42");
  CHECK(table.rows[0][5].empty());  // no EOC with a single level
  CHECK(table.rows[0][7].empty());
  const StudyTable& trajectory = report.tables[1];
  CHECK(trajectory.name == "trajectory_level1");
  CHECK(trajectory.rows.size() == 21);  // initial state plus 20 steps
}

TEST_CASE("convergence validates its configuration") {
  ConvergenceOptions o;
  o.initialData = "nodal";
  CHECK_THROWS_AS(runConvergence(o), ValidationError);
  o = {};
  o.tau = -1.0;
  CHECK_THROWS_AS(runConvergence(o), ValidationError);
  o = {};
  o.levels = {0};
  CHECK_THROWS_AS(runConvergence(o), ValidationError);
  o = {};
  o.levels.clear();
  CHECK_THROWS_AS(runConvergence(o), ValidationError);
  o = {};
  o.tEnd = 0.0;
  CHECK_THROWS_AS(runConvergence(o), ValidationError);
}

TEST_CASE("coarse ritz study lands in the published rate bands") {
  RitzStudyOptions o;
  o.levels = {1, 2};
  o.times = {0.25};
  o.gammas = {1.0};
  const StudyReport report = runRitzStudy(o);
  REQUIRE(report.criteria.size() == 4);
  CHECK(report.pass());
  REQUIRE(report.tables.size() == 1);
  const StudyTable& table = report.tables[0];
  CHECK(table.columns.size() == 14);
  CHECK(table.columns.back() == "wl2_gamma1");
  CHECK(table.rows.size() == 2);
  CHECK_THROWS_AS(runRitzStudy(RitzStudyOptions{.times = {}}), ValidationError);
}

TEST_CASE("max principle study is reproducible byte for byte") {
  MaxPrincipleOptions o;
  o.levels = {2, 3};
  o.tEnd = 0.1;
  o.seed = 9;
  const StudyReport first = runMaxPrinciple(o);
  const StudyReport second = runMaxPrinciple(o);
  REQUIRE(first.criteria.size() == 2);
  CHECK(first.pass());

  const fs::path dirA = freshDir("maxp_a");
  const fs::path dirB = freshDir("maxp_b");
  writeStudyOutputs(dirA, first);
  writeStudyOutputs(dirB, second);
  CHECK(readAll(dirA / "maxprinciple.csv") == readAll(dirB / "maxprinciple.csv"));
  CHECK(readAll(dirA / "manifest.json") == readAll(dirB / "manifest.json"));

  MaxPrincipleOptions reseeded = o;
  reseeded.seed = 10;
  const StudyReport other = runMaxPrinciple(reseeded);
  const fs::path dirC = freshDir("maxp_c");
  writeStudyOutputs(dirC, other);
  CHECK(readAll(dirA / "maxprinciple.csv") != readAll(dirC / "maxprinciple.csv"));
}

TEST_CASE("coarse geometry study passes every configured bound") {
  GeometryOptions o;
  o.surfaceNames = {"ellipsoid-§7"};
  o.levels = {2, 3};
  o.times = {0.25};
  o.formLevelMax = 3;
  o.chordLevel = 3;
  o.pairCount = 3;
  const StudyReport report = runGeometryChecks(o);
  REQUIRE(report.criteria.size() == 10);
  CHECK(report.pass());
  REQUIRE(report.tables.size() == 3);
  CHECK(report.tables[0].name == "geometry_lift");
  CHECK(report.tables[1].name == "geometry_forms");
  CHECK(report.tables[2].name == "geometry_chords");
  CHECK(report.tables[0].rows.size() == 2);
  CHECK(report.tables[2].rows.size() == 1);
}

TEST_CASE("l2 projection decays exponentially away from the source") {
  L2DecayOptions o;
  o.level = 3;
  const StudyReport report = runL2Decay(o);
  REQUIRE(report.criteria.size() == 3);
  CHECK(report.criteria[0].name == "c3");
  CHECK(report.pass());
  CHECK(report.criteria[0].measured > 0.5);

  o.sourceElement = -1;
  CHECK_THROWS_AS(runL2Decay(o), ValidationError);
  o = {};
  o.level = 9;
  CHECK_THROWS_AS(runL2Decay(o), ValidationError);
}

TEST_CASE("mesh export writes an OFF file and an admissibility row") {
  MeshExportOptions o;
  o.level = 1;
  o.outDir = freshDir("export");
  const StudyReport report = runMeshExport(o);
  REQUIRE(report.criteria.size() == 3);
  CHECK(report.pass());
  const std::string off = readAll(o.outDir / "mesh_level1.off");
  CHECK(off.rfind("OFF", 0) == 0);

  writeStudyOutputs(o.outDir, report);
  CHECK(fs::exists(o.outDir / "admissibility.csv"));
  CHECK(fs::exists(o.outDir / "manifest.json"));
}

}  // TEST_SUITE

}  // namespace
