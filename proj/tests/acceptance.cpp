/// Acceptance harness. Runs the shipped verification studies plus the exact
/// structural and oracle identities, prints one verdict line per criterion
/// with the tolerances pinned below, writes every report under the output
/// directory (argv[1], default acceptance_out), and exits nonzero on any
/// failure.
#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "esfem/assembly.hpp"
#include "esfem/evolution.hpp"
#include "esfem/experiments.hpp"
#include "esfem/mesh.hpp"
#include "esfem/projections.hpp"
#include "esfem/surface.hpp"

namespace {

using namespace esfem;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

VectorX randomVector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorX v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

const CriterionResult& named(const StudyReport& report, const std::string& name) {
  for (const CriterionResult& c : report.criteria) {
    if (c.name == name) return c;
  }
  throw Error("acceptance: criterion " + name + " missing from " + report.study);
}

int passCount(const StudyReport& report) {
  int count = 0;
  for (const CriterionResult& c : report.criteria) count += c.pass ? 1 : 0;
  return count;
}

SurfaceMesh unitRightTriangle() {
  Points3 vertices(3, 3);
  vertices << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  Triangles tri(1, 3);
  tri << 0, 1, 2;
  return makeMesh(std::make_shared<const EvolvingSurface>(makePlane()),
                  std::move(vertices), std::move(tri), 0.0);
}

// Exact algebraic identities of the assembled system and of the discrete
// evolution operators.
StudyReport structuralReport() {
  StudyReport report;
  report.study = "structural";
  const SurfaceProblem& problem = builtinProblem("ellipsoid-§7");

  // Constants lie in the stiffness kernel.
  {
    const SurfaceMesh mesh = advectMesh(buildIcosphere(problem.surface, 3), 0.1);
    const VectorX ones = VectorX::Ones(mesh.vertexCount());
    report.criteria.push_back(makeCriterion(
        "stiffness-kernel",
        assembleStiffness(mesh).apply(ones).cwiseAbs().maxCoeff(), 0.0, 1e-12));
  }

  // The mass matrix is positive definite.
  {
    const SurfaceMesh mesh = advectMesh(buildIcosphere(problem.surface, 2), 0.1);
    const Eigen::SelfAdjointEigenSolver<MatrixX> eigen(
        MatrixX(assembleMass(mesh).matrix));
    report.criteria.push_back(makeCriterion(
        "mass-min-eigenvalue", eigen.eigenvalues().minCoeff(), 1e-12, kInf));
  }

  // Homogeneous trajectories conserve the mass integral exactly; the initial
  // data is shifted by a constant so the conserved quantity is order one.
  {
    const auto mesh0 =
        std::make_shared<const SurfaceMesh>(buildIcosphere(problem.surface, 2));
    const VectorX initial = VectorX::Ones(mesh0->vertexCount()) +
                            interpolate(mesh0, problem.solution.value).coefficients;
    BdfOptions opts;
    opts.order = 4;
    opts.tau = 1e-3;
    opts.t0 = 0.0;
    opts.tEnd = 0.1;
    opts.startup = StartupMode::Bootstrap;
    double reference = 0.0, drift = 0.0;
    bdfEvolve(*mesh0, initial, {}, opts,
              [&](int step, double, const SurfaceMesh& mesh, const MatrixX& state) {
                const VectorX ones = VectorX::Ones(state.rows());
                const double mass =
                    ones.dot(assembleMass(mesh).matrix * state.col(0));
                if (step == 0) reference = mass;
                drift = std::max(drift, std::abs(mass - reference));
              });
    report.criteria.push_back(makeCriterion(
        "mass-conservation", drift / std::abs(reference), 0.0, 1e-10));
  }

  // The discrete delta represents point evaluation through the mass matrix.
  {
    const SurfaceMesh mesh = advectMesh(buildIcosphere(problem.surface, 3), 0.25);
    const Eigen::Vector3i tri = mesh.triangle(5);
    const Vector3 xh =
        (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2])) / 3.0;
    const VectorX delta = discreteDelta(mesh, xh);
    const VectorX evaluation = nodalEvaluation(mesh, xh);
    report.criteria.push_back(makeCriterion(
        "delta-reproduction",
        (assembleMass(mesh).matrix * delta - evaluation).cwiseAbs().maxCoeff(), 0.0,
        1e-10));
  }

  // Forward/backward duality: <M(t) E(t,0) w, phi> = <M(0) w, E*(t,0) phi>.
  {
    const auto base =
        std::make_shared<const SurfaceMesh>(buildIcosphere(problem.surface, 2));
    const double t = 0.05;
    const auto meshT = std::make_shared<const SurfaceMesh>(advectMesh(*base, t));
    const VectorX w = randomVector(base->vertexCount(), 11);
    const VectorX phi = randomVector(base->vertexCount(), 12);
    BdfOptions opts;
    opts.order = 3;
    opts.tau = 5e-4;
    opts.t0 = 0.0;
    opts.tEnd = t;
    opts.startup = StartupMode::Bootstrap;
    const MatrixX forward = bdfEvolve(*base, w, {}, opts);
    const VectorX backward =
        adjointSolve(meshT, phi, 0.0, opts).coefficients.back();
    const SparseMatrix m0 = assembleMass(*base).matrix;
    const SparseMatrix mt = assembleMass(*meshT).matrix;
    const double gap = std::abs(phi.dot(mt * forward.col(0)) - backward.dot(m0 * w));
    const double scale = std::sqrt(w.dot(m0 * w)) * std::sqrt(phi.dot(mt * phi));
    report.criteria.push_back(
        makeCriterion("adjoint-duality", gap / scale, 0.0, 1e-6));
  }

  // Dense evolution matrices on a static surface obey E*(t,0) = M^{-1} E^T M.
  {
    const SurfaceMesh base = buildIcosphere(builtinProblem("sphere-static").surface, 0);
    const int n = base.vertexCount();
    const double t = 0.05;
    BdfOptions opts;
    opts.order = 2;
    opts.tau = 1e-2;
    opts.t0 = 0.0;
    opts.tEnd = t;
    opts.startup = StartupMode::Bootstrap;
    const MatrixX forward = bdfEvolve(base, MatrixX::Identity(n, n), {}, opts);
    const auto meshT = std::make_shared<const SurfaceMesh>(advectMesh(base, t));
    MatrixX adjoint(n, n);
    for (int j = 0; j < n; ++j) {
      adjoint.col(j) =
          adjointSolve(meshT, VectorX::Unit(n, j), 0.0, opts).coefficients.back();
    }
    const MatrixX mass = MatrixX(assembleMass(base).matrix);
    const MatrixX predicted = mass.ldlt().solve(forward.transpose() * mass);
    report.criteria.push_back(makeCriterion(
        "adjoint-matrix-identity", (adjoint - predicted).cwiseAbs().maxCoeff(), 0.0,
        1e-6));
  }
  return report;
}

// Assembled quantities against independently derived values.
StudyReport oracleReport() {
  StudyReport report;
  report.study = "oracles";
  const SurfaceProblem& problem = builtinProblem("ellipsoid-§7");

  // Local matrices on the unit right triangle, hand integrated.
  {
    const SurfaceMesh mesh = unitRightTriangle();
    MatrixX massExpected(3, 3);
    massExpected << 1.0 / 12, 1.0 / 24, 1.0 / 24,
                    1.0 / 24, 1.0 / 12, 1.0 / 24,
                    1.0 / 24, 1.0 / 24, 1.0 / 12;
    MatrixX stiffnessExpected(3, 3);
    stiffnessExpected << 1.0, -0.5, -0.5,
                        -0.5,  0.5,  0.0,
                        -0.5,  0.0,  0.5;
    report.criteria.push_back(makeCriterion(
        "local-mass-gap",
        (MatrixX(assembleMass(mesh).matrix) - massExpected).cwiseAbs().maxCoeff(),
        0.0, 1e-14));
    report.criteria.push_back(
        makeCriterion("local-stiffness-gap",
                      (MatrixX(assembleStiffness(mesh).matrix) - stiffnessExpected)
                          .cwiseAbs()
                          .maxCoeff(),
                      0.0, 1e-14));
  }

  // The velocity forms differentiate mass and stiffness along the flow:
  // d/dt z^T M(t) phi = z^T G(t) phi and d/dt z^T A(t) phi = z^T B(t) phi
  // for fixed nodal vectors, checked by centered differences.
  {
    const SurfaceMesh base = buildIcosphere(problem.surface, 3);
    const double dt = 1e-5;
    const VectorX z = randomVector(base.vertexCount(), 21);
    const VectorX phi = randomVector(base.vertexCount(), 22);
    double massGap = 0.0, stiffnessGap = 0.0;
    for (double t : {0.1, 0.35}) {
      const SurfaceMesh mesh = advectMesh(base, t);
      const SurfaceMesh before = advectMesh(base, t - dt);
      const SurfaceMesh after = advectMesh(base, t + dt);
      const VelocityForms forms =
          assembleVelocityForms(mesh, interpolateVelocity(mesh));
      const double massRate =
          (assembleMass(after).inner(z, phi) - assembleMass(before).inner(z, phi)) /
          (2 * dt);
      const double stiffnessRate = (assembleStiffness(after).inner(z, phi) -
                                    assembleStiffness(before).inner(z, phi)) /
                                   (2 * dt);
      massGap = std::max(massGap, std::abs(massRate - forms.g.inner(z, phi)));
      stiffnessGap =
          std::max(stiffnessGap, std::abs(stiffnessRate - forms.b.inner(z, phi)));
    }
    report.criteria.push_back(
        makeCriterion("transport-mass-gap", massGap, 0.0, 1e-4));
    report.criteria.push_back(
        makeCriterion("transport-stiffness-gap", stiffnessGap, 0.0, 1e-3));
  }

  // The manufactured load against closed forms derived with an independent
  // symbolic computation, at the initial time.
  {
    const double pi = std::numbers::pi;
    const double root = 1.0 / std::sqrt(2.0);
    struct Sample {
      Vector3 point;
      double value;
    };
    const Sample samples[] = {
        {{root, root, 0.0}, 3 * pi / 16},
        {{1.0, 0.0, 0.0}, 0.0},
        {{0.6, 0.64, 0.48}, 492 * pi / 3125},
    };
    double gap = 0.0;
    for (const Sample& s : samples) {
      gap = std::max(gap, std::abs(problem.forcing(s.point, 0.0) - s.value));
    }
    report.criteria.push_back(makeCriterion("forcing-oracle-gap", gap, 0.0, 1e-10));
  }
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path outDir = argc > 1 ? argv[1] : "acceptance_out";
  std::vector<StudyReport> reports;
  int failures = 0;
  char line[256];

  const auto verdict = [&failures](int index, bool pass, const char* text) {
    std::printf("%s criterion-%d: %s\n", pass ? "PASS" : "FAIL", index, text);
    std::fflush(stdout);
    if (!pass) ++failures;
  };
  const auto guarded = [&verdict](int index,
                                  const std::function<std::pair<bool, std::string>()>& block) {
    try {
      const std::pair<bool, std::string> result = block();
      verdict(index, result.first, result.second.c_str());
    } catch (const std::exception& e) {
      verdict(index, false, (std::string("exception: ") + e.what()).c_str());
    }
  };

  guarded(1, [&]() -> std::pair<bool, std::string> {
    const auto start = Clock::now();
    const StudyReport report = runConvergence(ConvergenceOptions{});
    const double secs = secondsSince(start);
    writeStudyOutputs(outDir / "convergence", report);
    reports.push_back(report);
    std::snprintf(line, sizeof line,
                  "error table: %d/%zu bands hit, final eoc %.3f / %.3f, %.1f s "
                  "(budget 600)",
                  passCount(report), report.criteria.size(),
                  named(report, "linf-eoc-final").measured,
                  named(report, "w1inf-eoc-final").measured, secs);
    return {report.pass() && secs <= 600.0, line};
  });

  guarded(2, [&]() -> std::pair<bool, std::string> {
    const auto start = Clock::now();
    const StudyReport report = runGeometryChecks(GeometryOptions{});
    const double secs = secondsSince(start);
    writeStudyOutputs(outDir / "geometry", report);
    reports.push_back(report);
    const CriterionResult& distance = named(report, "distance-rate");
    const CriterionResult& measure = named(report, "measure-rate");
    std::snprintf(line, sizeof line,
                  "lift distance rate %.3f, measure rate %.3f (bound %.2f), %.1f s "
                  "(budget 60)",
                  distance.measured, measure.measured, distance.lower, secs);
    return {distance.pass && measure.pass && secs <= 60.0, line};
  });

  guarded(3, [&]() -> std::pair<bool, std::string> {
    const StudyReport report = runRitzStudy(RitzStudyOptions{});
    writeStudyOutputs(outDir / "ritz", report);
    reports.push_back(report);
    std::snprintf(line, sizeof line,
                  "elliptic projection and material derivative: %d/%zu rate bands hit",
                  passCount(report), report.criteria.size());
    return {report.pass(), line};
  });

  guarded(4, [&]() -> std::pair<bool, std::string> {
    const StudyReport report = runMaxPrinciple(MaxPrincipleOptions{});
    writeStudyOutputs(outDir / "maxprinciple", report);
    reports.push_back(report);
    std::snprintf(line, sizeof line,
                  "sup-ratio slope %.3f, green mass slope %.3f (bound %.2f)",
                  named(report, "sup-ratio-log-slope").measured,
                  named(report, "green-l1-log-slope").measured,
                  named(report, "sup-ratio-log-slope").upper);
    return {report.pass(), line};
  });

  guarded(5, [&]() -> std::pair<bool, std::string> {
    const StudyReport report = structuralReport();
    writeStudyOutputs(outDir / "structural", report);
    reports.push_back(report);
    std::snprintf(line, sizeof line,
                  "%d/%zu identities within tolerance (kernel, definiteness, "
                  "conservation, delta, duality, adjoint matrix)",
                  passCount(report), report.criteria.size());
    return {report.pass(), line};
  });

  guarded(6, [&]() -> std::pair<bool, std::string> {
    const StudyReport report = oracleReport();
    writeStudyOutputs(outDir / "oracles", report);
    reports.push_back(report);
    std::snprintf(line, sizeof line,
                  "%d/%zu oracle gaps within tolerance (local matrices, transport, "
                  "manufactured load)",
                  passCount(report), report.criteria.size());
    return {report.pass(), line};
  });

  guarded(7, [&]() -> std::pair<bool, std::string> {
    const auto start = Clock::now();
    const StudyReport report = runL2Decay(L2DecayOptions{});
    const double secs = secondsSince(start);
    writeStudyOutputs(outDir / "l2decay", report);
    reports.push_back(report);
    std::snprintf(line, sizeof line,
                  "decay constant %.3f, fit r-squared %.4f, %.1f s (budget 30)",
                  named(report, "c3").measured, named(report, "r-squared").measured,
                  secs);
    return {report.pass() && secs <= 30.0, line};
  });

  writeManifest(outDir, reports);
  std::printf("acceptance: %d/7 criteria passed; outputs in %s\n", 7 - failures,
              outDir.string().c_str());
  return failures == 0 ? 0 : 1;
}
