#include "esfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <queue>

#include "esfem/parallel.hpp"

namespace esfem {

namespace {

void buildElementGeometry(SurfaceMesh& mesh) {
  const int ne = mesh.elementCount();
  mesh.elements.resize(static_cast<std::size_t>(ne));
  double hmax = 0.0;
  for (int e = 0; e < ne; ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const Vector3 v0 = mesh.vertex(tri[0]);
    const Vector3 v1 = mesh.vertex(tri[1]);
    const Vector3 v2 = mesh.vertex(tri[2]);
    const Vector3 cross = (v1 - v0).cross(v2 - v0);
    ElementGeometry& g = mesh.elements[static_cast<std::size_t>(e)];
    const double doubleArea = cross.norm();
    const double edgeMax =
        std::max({(v1 - v0).norm(), (v2 - v1).norm(), (v0 - v2).norm()});
    if (!(doubleArea > 1e-14 * edgeMax * edgeMax)) {
      throw MeshError("element " + std::to_string(e) + " is degenerate");
    }
    g.area = 0.5 * doubleArea;
    g.normal = cross / doubleArea;
    // grad(lambda_i) = n x e_i / (2 area), e_i the edge opposite vertex i
    // traversed counterclockwise.
    const Vector3 edges[3] = {v2 - v1, v0 - v2, v1 - v0};
    for (int i = 0; i < 3; ++i) {
      g.basisGradient[i] = g.normal.cross(edges[i]) / doubleArea;
    }
    hmax = std::max(hmax, edgeMax);
  }
  mesh.h = hmax;
}

}  // namespace

SurfaceMesh makeMesh(std::shared_ptr<const EvolvingSurface> surface, Points3 vertices,
                     Triangles triangles, double time) {
  SurfaceMesh mesh;
  mesh.surface = std::move(surface);
  mesh.time = time;
  mesh.vertices = vertices;
  mesh.referenceVertices = std::move(vertices);
  mesh.triangles = std::make_shared<const Triangles>(std::move(triangles));
  buildElementGeometry(mesh);
  return mesh;
}

SurfaceMesh buildIcosphere(std::shared_ptr<const EvolvingSurface> surface, int level) {
  if (level < 0 || level > 8) {
    throw DomainError("buildIcosphere: level must lie in [0, 8], got " +
                      std::to_string(level));
  }
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vector3> verts = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<Eigen::Vector3i> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  const double t0 = surface->timeBegin;
  // Icosahedron vertices are unit; both builtins start on the unit sphere,
  // but project anyway so user-supplied surfaces work too.
  for (auto& v : verts) v = closestPoint(*surface, v, t0).point;

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpointIndex;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpointIndex.find(key);
      if (it != midpointIndex.end()) return it->second;
      const Vector3 m = 0.5 * (verts[static_cast<std::size_t>(a)] +
                               verts[static_cast<std::size_t>(b)]);
      verts.push_back(closestPoint(*surface, m, t0).point);
      const int idx = static_cast<int>(verts.size()) - 1;
      midpointIndex.emplace(key, idx);
      return idx;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(tris.size() * 4);
    for (const auto& tri : tris) {
      const int a = tri[0], b = tri[1], c = tri[2];
      const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
      next.push_back({a, ab, ca});
      next.push_back({b, bc, ab});
      next.push_back({c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  Points3 vertexMatrix(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    vertexMatrix.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
  }
  Triangles triangleMatrix(static_cast<Eigen::Index>(tris.size()), 3);
  for (std::size_t i = 0; i < tris.size(); ++i) {
    triangleMatrix.row(static_cast<Eigen::Index>(i)) = tris[i].transpose();
  }
  SurfaceMesh mesh = makeMesh(std::move(surface), std::move(vertexMatrix),
                              std::move(triangleMatrix), t0);
  mesh.level = level;
  return mesh;
}

SurfaceMesh advectMesh(const SurfaceMesh& mesh, double t) {
  mesh.surface->requireTime(t);
  SurfaceMesh out;
  out.surface = mesh.surface;
  out.time = t;
  out.level = mesh.level;
  out.referenceVertices = mesh.referenceVertices;
  out.triangles = mesh.triangles;
  out.vertices.resize(mesh.vertices.rows(), 3);
  for (int j = 0; j < mesh.vertexCount(); ++j) {
    out.vertices.row(j) =
        mesh.surface->flowMap(mesh.referenceVertices.row(j).transpose(), t).transpose();
  }
  buildElementGeometry(out);
  const AdmissibilityReport report = admissibilityReport(out);
  if (report.minInradiusRatio < 0.05) {
    throw MeshError("advectMesh: inradius ratio " +
                    std::to_string(report.minInradiusRatio) + " below 0.05 at t = " +
                    std::to_string(t));
  }
  return out;
}

AdmissibilityReport admissibilityReport(const SurfaceMesh& mesh) {
  AdmissibilityReport r;
  r.vertexCount = mesh.vertexCount();
  r.elementCount = mesh.elementCount();
  r.h = mesh.h;
  double minRatio = std::numeric_limits<double>::infinity();
  double minArea = std::numeric_limits<double>::infinity();
  double maxArea = 0.0;
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const Vector3 v0 = mesh.vertex(tri[0]);
    const Vector3 v1 = mesh.vertex(tri[1]);
    const Vector3 v2 = mesh.vertex(tri[2]);
    const double a = (v1 - v0).norm(), b = (v2 - v1).norm(), c = (v0 - v2).norm();
    const double area = mesh.elements[static_cast<std::size_t>(e)].area;
    const double diameter = std::max({a, b, c});
    if (!(area > 1e-14 * diameter * diameter) || diameter == 0.0) {
      throw MeshError("admissibilityReport: degenerate element " + std::to_string(e));
    }
    const double inradius = 2.0 * area / (a + b + c);
    minRatio = std::min(minRatio, inradius / diameter);
    minArea = std::min(minArea, area);
    maxArea = std::max(maxArea, area);
  }
  r.minInradiusRatio = minRatio;
  r.maxAreaRatio = maxArea / minArea;

  std::map<std::pair<int, int>, int> edgeCount;
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    for (int k = 0; k < 3; ++k) {
      edgeCount[std::minmax(tri[k], tri[(k + 1) % 3])] += 1;
    }
  }
  r.closed = std::all_of(edgeCount.begin(), edgeCount.end(),
                         [](const auto& kv) { return kv.second == 2; });
  r.eulerCharacteristic = r.vertexCount - static_cast<int>(edgeCount.size()) +
                          r.elementCount;
  return r;
}

VectorX graphGeodesicsFrom(const SurfaceMesh& mesh, int source) {
  const int n = mesh.vertexCount();
  if (source < 0 || source >= n) throw DomainError("graphGeodesicsFrom: bad source vertex");
  std::vector<std::vector<std::pair<int, double>>> adjacency(
      static_cast<std::size_t>(n));
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const double w = (mesh.vertex(a) - mesh.vertex(b)).norm();
      adjacency[static_cast<std::size_t>(a)].push_back({b, w});
      adjacency[static_cast<std::size_t>(b)].push_back({a, w});
    }
  }
  VectorX dist = VectorX::Constant(n, std::numeric_limits<double>::infinity());
  dist[source] = 0.0;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (const auto& [w, len] : adjacency[static_cast<std::size_t>(v)]) {
      if (dist[v] + len < dist[w]) {
        dist[w] = dist[v] + len;
        queue.push({dist[w], w});
      }
    }
  }
  return dist;
}

double graphGeodesic(const SurfaceMesh& mesh, int from, int to) {
  if (to < 0 || to >= mesh.vertexCount()) throw DomainError("graphGeodesic: bad target");
  return graphGeodesicsFrom(mesh, from)[to];
}

LiftedQuadrature buildLiftedQuadrature(const SurfaceMesh& mesh, int degree, int threads) {
  const TriangleQuadrature& rule = triangleQuadrature(degree);
  const EvolvingSurface& surface = *mesh.surface;
  const double t = mesh.time;
  LiftedQuadrature lifted;
  lifted.degree = degree;
  lifted.pointsPerElement = rule.size();
  lifted.points.resize(static_cast<std::size_t>(mesh.elementCount()) *
                       static_cast<std::size_t>(rule.size()));

  std::exception_ptr failure;
  std::mutex failureLock;
  parallelFor(static_cast<std::size_t>(mesh.elementCount()), threads,
              [&](std::size_t begin, std::size_t end) {
    try {
      for (std::size_t e = begin; e < end; ++e) {
        const Eigen::Vector3i tri = mesh.triangle(static_cast<int>(e));
        const ElementGeometry& g = mesh.elements[e];
        const Vector3 v0 = mesh.vertex(tri[0]);
        const Vector3 v1 = mesh.vertex(tri[1]);
        const Vector3 v2 = mesh.vertex(tri[2]);
        // Orthonormal tangent frame of the flat element.
        const Vector3 tau1 = (v1 - v0).normalized();
        const Vector3 tau2 = g.normal.cross(tau1);
        for (int q = 0; q < rule.size(); ++q) {
          LiftedPoint& lp = lifted.points[e * static_cast<std::size_t>(rule.size()) +
                                          static_cast<std::size_t>(q)];
          const auto bary = rule.barycentric.row(q);
          lp.point = bary[0] * v0 + bary[1] * v1 + bary[2] * v2;
          lp.weight = rule.weights[q] * g.area;
          const SurfacePointData cp = closestPoint(surface, lp.point, t);
          lp.lifted = cp.point;
          lp.normal = cp.normal;
          lp.signedDistance = cp.signedDistance;
          // Hessian of the signed distance at the off-surface point:
          // eigenvalues kappa_i / (1 + d kappa_i) of the shape operator.
          const Matrix3 distanceHessian =
              cp.weingarten *
              (Matrix3::Identity() + cp.signedDistance * cp.weingarten).inverse();
          const Matrix3 lift = Matrix3::Identity() -
                               cp.normal * cp.normal.transpose() -
                               cp.signedDistance * distanceHessian;
          lp.measureRatio = (lift * tau1).cross(lift * tau2).norm();
          const double cosFactor = cp.normal.dot(g.normal);
          if (std::abs(cosFactor) < 0.1) {
            throw GeometryError("buildLiftedQuadrature: element and surface normals "
                                "nearly orthogonal");
          }
          lp.liftGradient = (Matrix3::Identity() - cp.signedDistance * distanceHessian)
                                .inverse() *
                            (Matrix3::Identity() -
                             g.normal * cp.normal.transpose() / cosFactor);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failureLock);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return lifted;
}

void exportOff(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("exportOff: cannot open " + path);
  out << "OFF\n" << mesh.vertexCount() << ' ' << mesh.elementCount() << " 0\n";
  char buffer[128];
  for (int i = 0; i < mesh.vertexCount(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%.17g %.17g %.17g\n", mesh.vertices(i, 0),
                  mesh.vertices(i, 1), mesh.vertices(i, 2));
    out << buffer;
  }
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  }
}

}  // namespace esfem
