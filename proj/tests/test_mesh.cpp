/// Mesh construction and lift checks: icosphere refinement, admissibility,
/// advected meshes, graph geodesics and the lifted quadrature machinery.
#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "esfem/mesh.hpp"
#include "esfem/quadrature.hpp"
#include "esfem/surface.hpp"

using namespace esfem;

namespace {
constexpr double kPi = std::numbers::pi;

SurfaceMesh icosphere(int level, double t = 0.0) {
  SurfaceMesh mesh = buildIcosphere(builtinProblem("ellipsoid-§7").surface, level);
  return t == 0.0 ? mesh : advectMesh(mesh, t);
}

std::shared_ptr<const EvolvingSurface> plane() {
  return std::make_shared<const EvolvingSurface>(makePlane());
}
}  // namespace

TEST_SUITE_BEGIN("mesh");

TEST_CASE("triangle quadrature rules") {
  for (int degree : {2, 4, 6}) {
    const TriangleQuadrature rule = triangleQuadrature(degree);
    CHECK(std::abs(rule.weights.sum() - 1.0) < 1e-14);
    for (int q = 0; q < rule.barycentric.rows(); ++q) {
      CHECK(std::abs(rule.barycentric.row(q).sum() - 1.0) < 1e-14);
      CHECK(rule.barycentric.row(q).minCoeff() > 0.0);
    }
  }
  CHECK(triangleQuadrature(2).weights.size() == 3);
  CHECK(triangleQuadrature(4).weights.size() == 6);
  CHECK(triangleQuadrature(6).weights.size() == 12);
  CHECK_THROWS_AS(triangleQuadrature(3), DomainError);
}

TEST_CASE("icosphere vertex counts and topology") {
  const int expected[] = {12, 42, 162, 642, 2562};
  for (int level = 0; level <= 4; ++level) {
    const SurfaceMesh mesh = icosphere(level);
    CHECK(mesh.vertexCount() == expected[level]);
    CHECK(mesh.elementCount() == 20 * (1 << (2 * level)));
    const AdmissibilityReport report = admissibilityReport(mesh);
    CHECK(report.closed);
    CHECK(report.eulerCharacteristic == 2);
    CHECK(report.minInradiusRatio > 0.1);
  }
  CHECK_THROWS_AS(buildIcosphere(builtinProblem("sphere-static").surface, 9),
                  DomainError);
}

TEST_CASE("mesh width halves per level") {
  double previous = icosphere(1).h;
  for (int level = 2; level <= 4; ++level) {
    const double h = icosphere(level).h;
    const double ratio = h / previous;
    CHECK(ratio > 0.45);
    CHECK(ratio < 0.55);
    previous = h;
  }
}

TEST_CASE("vertices stay on the moving level set") {
  const auto surface = builtinProblem("ellipsoid-§7").surface;
  const SurfaceMesh mesh = buildIcosphere(surface, 2);
  for (double t : {0.25, 0.6}) {
    const SurfaceMesh moved = advectMesh(mesh, t);
    for (int i = 0; i < moved.vertexCount(); ++i) {
      CHECK(std::abs(surface->levelSet(moved.vertex(i), t)) < 1e-10);
    }
    CHECK(admissibilityReport(moved).minInradiusRatio > 0.1);
    CHECK(moved.triangles == mesh.triangles);
  }
}

TEST_CASE("element geometry on reference triangles") {
  // Equilateral triangle: inradius / diameter = 1 / (2 sqrt 3).
  Points3 vertices(3, 3);
  vertices << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2, 0;
  Triangles tri(1, 3);
  tri << 0, 1, 2;
  const SurfaceMesh mesh = makeMesh(plane(), vertices, tri, 0.0);
  const ElementGeometry& geom = mesh.elements[0];
  CHECK(std::abs(geom.area - std::sqrt(3.0) / 4) < 1e-15);
  CHECK((geom.normal - Vector3(0, 0, 1)).norm() < 1e-15);
  // Basis gradients are tangential and biorthogonal to the vertices:
  // grad(lambda_j) . (a_j - a_i) = 1 for every other vertex i.
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(geom.basisGradient[j].dot(geom.normal)) < 1e-15);
    for (int i = 0; i < 3; ++i) {
      if (i == j) continue;
      const Vector3 edge = (vertices.row(j) - vertices.row(i)).transpose();
      CHECK(std::abs(geom.basisGradient[j].dot(edge) - 1.0) < 1e-14);
    }
  }
  CHECK(std::abs(admissibilityReport(mesh).minInradiusRatio -
                 1 / (2 * std::sqrt(3.0))) < 1e-14);

  Points3 degenerate(3, 3);
  degenerate << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  CHECK_THROWS_AS(makeMesh(plane(), degenerate, tri, 0.0), MeshError);
}

TEST_CASE("graph geodesics approximate intrinsic distance") {
  const SurfaceMesh mesh = icosphere(3);
  // Vertex 0 of the icosahedron seed has an antipodal seed vertex; the
  // unit-sphere geodesic distance between antipodes is pi.
  const VectorX dist = graphGeodesicsFrom(mesh, 0);
  const double far = dist.maxCoeff();
  CHECK(far >= kPi * 0.999);
  CHECK(far <= kPi * 1.1);
  // Edge-path lengths dominate the chord but stay comparable.
  for (int i = 1; i < mesh.vertexCount(); i += 97) {
    const double chord = (mesh.vertex(i) - mesh.vertex(0)).norm();
    CHECK(graphGeodesic(mesh, 0, i) >= chord - 1e-12);
  }
}

TEST_CASE("flat meshes lift trivially") {
  Points3 vertices(4, 3);
  vertices << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  Triangles tri(2, 3);
  tri << 0, 1, 2, 0, 2, 3;
  const SurfaceMesh mesh = makeMesh(plane(), vertices, tri, 0.0);
  const LiftedQuadrature lifted = buildLiftedQuadrature(mesh, 4);
  CHECK(lifted.pointsPerElement == 6);
  for (const LiftedPoint& p : lifted.points) {
    CHECK(std::abs(p.signedDistance) < 1e-14);
    CHECK(std::abs(p.measureRatio - 1.0) < 1e-14);
    CHECK((p.lifted - p.point).norm() < 1e-14);
    const Vector3 g(0.25, -0.75, 0.0);
    CHECK((p.liftGradient * g - g).norm() < 1e-13);
  }
}

TEST_CASE("lift distance and measure distortion shrink at second order") {
  double previousDistance = 0.0;
  double previousRatio = 0.0;
  for (int level : {2, 3, 4}) {
    const SurfaceMesh mesh = icosphere(level, 0.25);
    const LiftedQuadrature lifted = buildLiftedQuadrature(mesh, 2);
    double maxDistance = 0.0;
    double maxRatio = 0.0;
    for (const LiftedPoint& p : lifted.points) {
      maxDistance = std::max(maxDistance, std::abs(p.signedDistance));
      maxRatio = std::max(maxRatio, std::abs(1.0 - p.measureRatio));
    }
    if (level > 2) {
      CHECK(std::log2(previousDistance / maxDistance) > 1.8);
      CHECK(std::log2(previousRatio / maxRatio) > 1.8);
    }
    previousDistance = maxDistance;
    previousRatio = maxRatio;
  }
  // Level-4 distance is ~9.4e-4 at t = 0.25, consistent with h^2 H / 8.
  CHECK(previousDistance < 2e-3);
  CHECK(previousRatio < 5e-3);
}

TEST_CASE("lifted area converges to the surface area") {
  // |Gamma(0)| = 4 pi and |Gamma(0.25)| from high precision quadrature.
  const double areas[] = {4 * kPi, 13.56614491863661343};
  const double times[] = {0.0, 0.25};
  for (int k = 0; k < 2; ++k) {
    const SurfaceMesh mesh = icosphere(3, times[k]);
    const LiftedQuadrature lifted = buildLiftedQuadrature(mesh, 4);
    double area = 0.0;
    for (const LiftedPoint& p : lifted.points) area += p.weight * p.measureRatio;
    CHECK(std::abs(area - areas[k]) < 1e-4);
  }
}

TEST_SUITE_END();
