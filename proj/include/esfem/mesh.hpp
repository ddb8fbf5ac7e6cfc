#pragma once

#include <memory>
#include <string>
#include <vector>

#include "esfem/quadrature.hpp"
#include "esfem/surface.hpp"
#include "esfem/types.hpp"

namespace esfem {

// Per-element quantities of a flat triangle: oriented area, unit normal and
// the (constant) tangential gradients of the three nodal basis functions.
struct ElementGeometry {
  double area = 0.0;
  Vector3 normal;
  Vector3 basisGradient[3];
};

// Triangulated surface riding the flow: vertex j sits at
// flowMap(referenceVertices[j], time). Connectivity is immutable and shared
// between advected instances.
struct SurfaceMesh {
  std::shared_ptr<const EvolvingSurface> surface;
  double time = 0.0;
  int level = -1;  // subdivision count for icospheres, -1 for fixtures
  Points3 vertices;
  Points3 referenceVertices;
  std::shared_ptr<const Triangles> triangles;
  double h = 0.0;  // longest edge
  std::vector<ElementGeometry> elements;

  int vertexCount() const { return static_cast<int>(vertices.rows()); }
  int elementCount() const { return static_cast<int>(triangles->rows()); }
  Vector3 vertex(int i) const { return vertices.row(i).transpose(); }
  Eigen::Vector3i triangle(int e) const { return (*triangles).row(e).transpose(); }
};

// Recursively subdivided icosahedron with vertices projected onto Gamma(0);
// 10 * 4^level + 2 vertices. level must lie in [0, 8].
SurfaceMesh buildIcosphere(std::shared_ptr<const EvolvingSurface> surface, int level);

// Transports the mesh to time t along the exact flow. Throws MeshError when
// the advected mesh fails the admissibility thresholds.
SurfaceMesh advectMesh(const SurfaceMesh& mesh, double t);

// Mesh from explicit arrays (fixtures and import).
SurfaceMesh makeMesh(std::shared_ptr<const EvolvingSurface> surface, Points3 vertices,
                     Triangles triangles, double time = 0.0);

struct AdmissibilityReport {
  double h = 0.0;
  double minInradiusRatio = 0.0;  // min over elements of inradius / diameter
  double maxAreaRatio = 1.0;      // max element area / min element area
  int vertexCount = 0;
  int elementCount = 0;
  bool closed = false;  // every edge shared by exactly two triangles
  int eulerCharacteristic = 0;
};

// Shape-quality summary. Throws MeshError for degenerate (zero-area)
// elements.
AdmissibilityReport admissibilityReport(const SurfaceMesh& mesh);

// Dijkstra distances along mesh edges from a source vertex.
VectorX graphGeodesicsFrom(const SurfaceMesh& mesh, int source);
double graphGeodesic(const SurfaceMesh& mesh, int from, int to);

// Quadrature point on Gamma_h(t) together with its normal lift onto Gamma(t).
// weight includes the element area. liftGradient maps tangential gradients on
// the flat element to tangential gradients on Gamma(t) at the lifted point;
// measureRatio is the ratio of the area elements (dA = measureRatio dA_h).
struct LiftedPoint {
  Vector3 point;
  Vector3 lifted;
  Vector3 normal;
  double weight = 0.0;
  double signedDistance = 0.0;
  double measureRatio = 1.0;
  Matrix3 liftGradient;
};

struct LiftedQuadrature {
  int degree = 0;
  int pointsPerElement = 0;
  std::vector<LiftedPoint> points;  // element-major order

  const LiftedPoint& at(int element, int q) const {
    return points[static_cast<std::size_t>(element) *
                      static_cast<std::size_t>(pointsPerElement) +
                  static_cast<std::size_t>(q)];
  }
};

// Builds the lifted rule of the given degree ({2,4,6}) on every element.
LiftedQuadrature buildLiftedQuadrature(const SurfaceMesh& mesh, int degree,
                                       int threads = 1);

// Object File Format export of the current configuration.
void exportOff(const SurfaceMesh& mesh, const std::string& path);

}  // namespace esfem
