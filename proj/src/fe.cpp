#include "esfem/fe.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace esfem {

double FeFunction::valueAt(int element, const Vector3& barycentric) const {
  const Eigen::Vector3i tri = mesh->triangle(element);
  return barycentric[0] * coefficients[tri[0]] + barycentric[1] * coefficients[tri[1]] +
         barycentric[2] * coefficients[tri[2]];
}

Vector3 FeFunction::gradientOn(int element) const {
  const Eigen::Vector3i tri = mesh->triangle(element);
  const ElementGeometry& g = mesh->elements[static_cast<std::size_t>(element)];
  return coefficients[tri[0]] * g.basisGradient[0] +
         coefficients[tri[1]] * g.basisGradient[1] +
         coefficients[tri[2]] * g.basisGradient[2];
}

FeFunction interpolate(std::shared_ptr<const SurfaceMesh> mesh,
                       const std::function<double(const Vector3&, double)>& field) {
  FeFunction f;
  f.coefficients.resize(mesh->vertexCount());
  for (int j = 0; j < mesh->vertexCount(); ++j) {
    f.coefficients[j] = field(mesh->vertex(j), mesh->time);
  }
  f.mesh = std::move(mesh);
  return f;
}

PointLocation locatePoint(const SurfaceMesh& mesh, const Vector3& x) {
  PointLocation best;
  double bestScore = std::numeric_limits<double>::infinity();
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const Vector3 v0 = mesh.vertex(tri[0]);
    const Vector3 e1 = mesh.vertex(tri[1]) - v0;
    const Vector3 e2 = mesh.vertex(tri[2]) - v0;
    const Vector3 rhs = x - v0;
    Eigen::Matrix2d gram;
    gram << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
    const Eigen::Vector2d beta =
        gram.ldlt().solve(Eigen::Vector2d(e1.dot(rhs), e2.dot(rhs)));
    const Vector3 bary(1.0 - beta[0] - beta[1], beta[0], beta[1]);
    const double offPlane = (rhs - beta[0] * e1 - beta[1] * e2).norm();
    const double outside = std::max(0.0, -bary.minCoeff());
    const double score = offPlane + mesh.h * outside;
    if (score < bestScore) {
      bestScore = score;
      best.element = e;
      best.barycentric = bary;
    }
  }
  if (best.element < 0 || bestScore > 1e-8 * std::max(1.0, mesh.h)) {
    throw GeometryError("locatePoint: point is not on the triangulated surface");
  }
  // Clamp roundoff-negative coordinates.
  for (int i = 0; i < 3; ++i) best.barycentric[i] = std::max(0.0, best.barycentric[i]);
  best.barycentric /= best.barycentric.sum();
  return best;
}

void saveFeFunctionCsv(const FeFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("saveFeFunctionCsv: cannot open " + path);
  out << "index,value\n";
  char buffer[64];
  for (Eigen::Index i = 0; i < f.coefficients.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%lld,%.17g\n", static_cast<long long>(i),
                  f.coefficients[i]);
    out << buffer;
  }
}

FeFunction loadFeFunctionCsv(std::shared_ptr<const SurfaceMesh> mesh,
                             const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("loadFeFunctionCsv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  FeFunction f;
  f.coefficients = VectorX::Zero(mesh->vertexCount());
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    const int index = std::stoi(cell);
    std::getline(row, cell, ',');
    if (index < 0 || index >= mesh->vertexCount()) {
      throw ValidationError("loadFeFunctionCsv: vertex index " + std::to_string(index) +
                            " out of range");
    }
    f.coefficients[index] = std::stod(cell);
    ++count;
  }
  if (count != mesh->vertexCount()) {
    throw ValidationError("loadFeFunctionCsv: expected " +
                          std::to_string(mesh->vertexCount()) + " rows, got " +
                          std::to_string(count));
  }
  f.mesh = std::move(mesh);
  return f;
}

}  // namespace esfem
