#include "esfem/projections.hpp"

#include "esfem/quadrature.hpp"

namespace esfem {

VectorX l2Project(const SurfaceMesh& mesh,
                  const std::function<double(int, int, const Vector3&)>& sample,
                  int degree) {
  const TriangleQuadrature& rule = triangleQuadrature(degree);
  VectorX load = VectorX::Zero(mesh.vertexCount());
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const ElementGeometry& g = mesh.elements[static_cast<std::size_t>(e)];
    const Vector3 v0 = mesh.vertex(tri[0]);
    const Vector3 v1 = mesh.vertex(tri[1]);
    const Vector3 v2 = mesh.vertex(tri[2]);
    for (int q = 0; q < rule.size(); ++q) {
      const auto bary = rule.barycentric.row(q);
      const Vector3 x = bary[0] * v0 + bary[1] * v1 + bary[2] * v2;
      const double w = rule.weights[q] * g.area * sample(e, q, x);
      for (int i = 0; i < 3; ++i) load[tri[i]] += w * bary[i];
    }
  }
  const SparseSymmetricForm mass = assembleMass(mesh);
  return cgSolve(mass.matrix, load);
}

VectorX l2Project(const SurfaceMesh& mesh,
                  const std::function<double(const Vector3&, double)>& f, int degree) {
  const double t = mesh.time;
  return l2Project(
      mesh, [&](int, int, const Vector3& x) { return f(x, t); }, degree);
}

VectorX ritzMap(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                const SpaceTimeField& u) {
  const ExactForms loads = assembleExactForms(mesh, lifted, u);
  const SparseSymmetricForm mass = assembleMass(mesh);
  const SparseSymmetricForm stiffness = assembleStiffness(mesh);
  const SparseMatrix system = stiffness.matrix + mass.matrix;
  return cgSolve(system, loads.stiffnessLoad + loads.massLoad);
}

VectorX ritzMaterialDerivative(const SurfaceMesh& mesh, const SpaceTimeField& u,
                               double dt, int liftedDegree, bool* oneSidedWarning) {
  if (!(dt > 0)) throw DomainError("ritzMaterialDerivative: dt must be positive");
  const EvolvingSurface& surface = *mesh.surface;
  const double t = mesh.time;
  auto ritzAt = [&](double s) {
    const SurfaceMesh advected = advectMesh(mesh, s);
    const LiftedQuadrature lifted = buildLiftedQuadrature(advected, liftedDegree);
    return ritzMap(advected, lifted, u);
  };
  const bool lowClipped = t - dt < surface.timeBegin;
  const bool highClipped = t + dt > surface.timeEnd;
  if (oneSidedWarning) *oneSidedWarning = lowClipped || highClipped;
  if (lowClipped && highClipped) {
    throw DomainError("ritzMaterialDerivative: time interval shorter than 2 dt");
  }
  if (lowClipped) {
    // Second-order one-sided difference at the left end.
    return (-3.0 * ritzAt(t) + 4.0 * ritzAt(t + dt) - ritzAt(t + 2 * dt)) / (2 * dt);
  }
  if (highClipped) {
    return (3.0 * ritzAt(t) - 4.0 * ritzAt(t - dt) + ritzAt(t - 2 * dt)) / (2 * dt);
  }
  return (ritzAt(t + dt) - ritzAt(t - dt)) / (2 * dt);
}

VectorX nodalEvaluation(const SurfaceMesh& mesh, const Vector3& xh) {
  const PointLocation loc = locatePoint(mesh, xh);
  VectorX e = VectorX::Zero(mesh.vertexCount());
  const Eigen::Vector3i tri = mesh.triangle(loc.element);
  for (int i = 0; i < 3; ++i) e[tri[i]] = loc.barycentric[i];
  return e;
}

VectorX discreteDelta(const SurfaceMesh& mesh, const Vector3& xh) {
  const SparseSymmetricForm mass = assembleMass(mesh);
  return cgSolve(mass.matrix, nodalEvaluation(mesh, xh));
}

VectorX discreteGreen(const SurfaceMesh& mesh, const Vector3& xh) {
  const SparseSymmetricForm mass = assembleMass(mesh);
  const SparseSymmetricForm stiffness = assembleStiffness(mesh);
  const SparseMatrix system = stiffness.matrix + mass.matrix;
  return cgSolve(system, nodalEvaluation(mesh, xh));
}

}  // namespace esfem
