#pragma once

#include <functional>
#include <memory>

#include "esfem/mesh.hpp"

namespace esfem {

// Piecewise-linear function on a SurfaceMesh, one coefficient per vertex.
struct FeFunction {
  std::shared_ptr<const SurfaceMesh> mesh;
  VectorX coefficients;

  double valueAt(int element, const Vector3& barycentric) const;
  // Tangential gradient; constant on each element.
  Vector3 gradientOn(int element) const;
};

// Nodal interpolation of an ambient field at time mesh->time.
FeFunction interpolate(std::shared_ptr<const SurfaceMesh> mesh,
                       const std::function<double(const Vector3&, double)>& field);

// Locates a point on the triangulated surface: element index and barycentric
// coordinates. Throws GeometryError when x is not on any element (tolerance
// relative to h).
struct PointLocation {
  int element = -1;
  Vector3 barycentric;
};
PointLocation locatePoint(const SurfaceMesh& mesh, const Vector3& x);

// CSV round trip: one "index,value" row per vertex.
void saveFeFunctionCsv(const FeFunction& f, const std::string& path);
FeFunction loadFeFunctionCsv(std::shared_ptr<const SurfaceMesh> mesh,
                             const std::string& path);

}  // namespace esfem
