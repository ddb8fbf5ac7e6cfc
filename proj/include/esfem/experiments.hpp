#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "esfem/types.hpp"

namespace esfem {

// Experimental order of convergence between two refinement rows:
//   eoc = ln(errPrev / errCur) / ln(hPrev / hCur),
// positive when the error decreases under refinement. Errors must be
// positive and the mesh widths distinct.
double computeEoc(double errPrev, double errCur, double hPrev, double hCur);

// Pairwise EOCs of a refinement sequence; result has length - 1 entries.
std::vector<double> computeEocs(const std::vector<double>& errors,
                                const std::vector<double>& h);

// Least-squares line y = intercept + slope x with coefficient of
// determination. Needs at least two distinct x values.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rSquared = 1.0;
};
LineFit fitLine(const std::vector<double>& x, const std::vector<double>& y);

// One measured quantity checked against a closed admissible band. Infinite
// bounds mark one-sided bands.
struct CriterionResult {
  std::string name;
  double measured = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool pass = false;
};

CriterionResult makeCriterion(std::string name, double measured, double lower,
                              double upper);

// A study's tabulated measurements plus its pass/fail summary. Tables are
// kept as rendered cells so integer and empty cells stay stable.
struct StudyTable {
  std::string name;  // file stem, e.g. "convergence"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct StudyReport {
  std::string study;
  std::vector<StudyTable> tables;
  std::vector<CriterionResult> criteria;

  bool pass() const;
};

// Cell renderers: %.17g for doubles (empty cell for NaN), decimal for ints.
std::string csvCell(double value);
std::string csvCell(int value);

// Writes one table as <dir>/<table.name>.csv, creating the directory.
void writeCsv(const std::filesystem::path& dir, const StudyTable& table);
// Writes every table of the report plus <dir>/manifest.json summarizing the
// criteria of all listed reports.
void writeStudyOutputs(const std::filesystem::path& dir, const StudyReport& report);
void writeManifest(const std::filesystem::path& dir,
                   const std::vector<StudyReport>& reports);

// Convergence of the full discretization against the manufactured solution:
// per level the L^inf(L^inf) error (max over steps of the lifted sup error)
// and the L^2(W^{1,inf}) error (tau-weighted root sum of squared lifted
// gradient sup errors), with EOCs.
struct ConvergenceOptions {
  std::string surfaceName = "ellipsoid-§7";
  std::vector<int> levels = {1, 2, 3, 4};
  double tau = 1e-3;
  int order = 4;
  double tEnd = 1.0;
  std::string initialData = "interpolant";  // "interpolant" or "ritz"
  int threads = 1;
  bool writeTrajectories = true;
  // Acceptance bands (defaults match the shipped verification suite).
  double eocLinfLow = 1.7, eocLinfHigh = 2.3;
  double eocW1infLow = 0.8, eocW1infHigh = 1.4;
  double monotoneSlack = 0.05;
  double monotoneFloor = 0.15;  // |eoc - 2| below this counts as "at 2"
  // Reference errors for levels {1,2,3,4}; factor band around them. A
  // nonpositive factor disables the comparison.
  double referenceFactor = 3.0;
};
StudyReport runConvergence(const ConvergenceOptions& options);

// Ritz map and its material derivative: sup and gradient-sup errors with
// EOCs at fixed times, plus weighted-L2 error columns for a gamma sweep of
// the parabolic weight.
struct RitzStudyOptions {
  std::string surfaceName = "ellipsoid-§7";
  std::vector<int> levels = {1, 2, 3, 4};
  std::vector<double> times = {0.0, 0.25};
  std::vector<double> gammas = {0.1, 1.0, 10.0};
  int threads = 1;
  double eocLinfLow = 1.7, eocLinfHigh = 2.3;
  double eocW1infLow = 0.8, eocW1infHigh = 1.3;
};
StudyReport runRitzStudy(const RitzStudyOptions& options);

// Maximum-norm stability probes: per level the homogeneous-evolution sup
// ratio and the adjoint Green-function L1 mass, raw and divided by |log h|.
// Pass when the linear growth in |log h| has slope at most slopeBound.
struct MaxPrincipleOptions {
  std::string surfaceName = "ellipsoid-§7";
  std::vector<int> levels = {2, 3, 4, 5};
  double tEnd = 0.25;
  double tau = 5e-3;
  int order = 2;
  std::uint64_t seed = 1;
  int threads = 1;
  double slopeBound = 1.1;
};
StudyReport runMaxPrinciple(const MaxPrincipleOptions& options);

// Geometric error estimates: second-order rates of the lift distance and the
// measure distortion, second-order rates of the four form perturbations
// (mass, stiffness and the two velocity forms against their lifted
// counterparts), the gradient-lift equivalence constant, the weight
// comparison constants and the chord/geodesic lower bound.
struct GeometryOptions {
  std::vector<std::string> surfaceNames = {"ellipsoid-§7", "sphere-static"};
  std::vector<int> levels = {1, 2, 3, 4, 5};
  std::vector<double> times = {0.0, 0.25, 0.6};
  // Form-gap instant; must avoid the stationary phases of the motion (the
  // builtin ellipsoid has zero velocity at t = 0.25 and t = 0.75).
  double formTime = 0.1;
  int formLevelMax = 4;
  int chordLevel = 3;
  int pairCount = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  double rateBound = 1.9;
  double gradientRatioBound = 1.5;
  double weightRatioBound = 2.0;
  double chordRatioBound = 0.5;
};
StudyReport runGeometryChecks(const GeometryOptions& options);

// Exponential decay of the L2 projection of single-element data: fits
// ln(max coefficient per distance band) against graph distance / h.
struct L2DecayOptions {
  std::string surfaceName = "ellipsoid-§7";
  int level = 4;
  double time = 0.0;
  int sourceElement = 0;
  double c3Low = 0.0, c3High = 10.0;
  double r2Min = 0.9;
};
StudyReport runL2Decay(const L2DecayOptions& options);

// Mesh export utility: OFF file plus an admissibility report row.
struct MeshExportOptions {
  std::string surfaceName = "ellipsoid-§7";
  int level = 3;
  double time = 0.0;
  std::filesystem::path outDir = "out";
};
StudyReport runMeshExport(const MeshExportOptions& options);

}  // namespace esfem
