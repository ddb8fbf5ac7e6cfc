#include "esfem/assembly.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <vector>

#include "esfem/parallel.hpp"
#include "esfem/quadrature.hpp"

namespace esfem {

namespace {

SparseMatrix fromElementMatrices(const SurfaceMesh& mesh,
                                 const std::vector<Matrix3>& local) {
  std::vector<Triplet> triplets;
  triplets.reserve(local.size() * 9);
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const Matrix3& m = local[static_cast<std::size_t>(e)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        triplets.emplace_back(tri[i], tri[j], m(i, j));
      }
    }
  }
  SparseMatrix matrix(mesh.vertexCount(), mesh.vertexCount());
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  matrix.makeCompressed();
  return matrix;
}

Matrix3 localMass(double area) {
  Matrix3 m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return Matrix3(area / 12.0 * m);
}

}  // namespace

SparseSymmetricForm assembleMass(const SurfaceMesh& mesh) {
  std::vector<Matrix3> local(static_cast<std::size_t>(mesh.elementCount()));
  for (int e = 0; e < mesh.elementCount(); ++e) {
    local[static_cast<std::size_t>(e)] =
        localMass(mesh.elements[static_cast<std::size_t>(e)].area);
  }
  return {fromElementMatrices(mesh, local), FormKind::Mass};
}

SparseSymmetricForm assembleStiffness(const SurfaceMesh& mesh) {
  std::vector<Matrix3> local(static_cast<std::size_t>(mesh.elementCount()));
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const ElementGeometry& g = mesh.elements[static_cast<std::size_t>(e)];
    Matrix3& m = local[static_cast<std::size_t>(e)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        m(i, j) = g.area * g.basisGradient[i].dot(g.basisGradient[j]);
      }
    }
  }
  return {fromElementMatrices(mesh, local), FormKind::Stiffness};
}

Points3 interpolateVelocity(const SurfaceMesh& mesh) {
  Points3 v(mesh.vertexCount(), 3);
  for (int j = 0; j < mesh.vertexCount(); ++j) {
    v.row(j) = mesh.surface->velocity(mesh.vertex(j), mesh.time).transpose();
  }
  return v;
}

VelocityForms assembleVelocityForms(const SurfaceMesh& mesh, const Points3& nodalVelocity) {
  if (nodalVelocity.rows() != mesh.vertexCount()) {
    throw DomainError("assembleVelocityForms: velocity rows must match vertex count");
  }
  std::vector<Matrix3> localG(static_cast<std::size_t>(mesh.elementCount()));
  std::vector<Matrix3> localB(static_cast<std::size_t>(mesh.elementCount()));
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const ElementGeometry& g = mesh.elements[static_cast<std::size_t>(e)];
    // Tangential Jacobian D(j,k) = d^G_j V_k; constant on the element.
    Matrix3 D = Matrix3::Zero();
    for (int i = 0; i < 3; ++i) {
      D += g.basisGradient[i] * nodalVelocity.row(tri[i]);
    }
    const double divergence = D.trace();
    const Matrix3 B = divergence * Matrix3::Identity() - (D + D.transpose());
    localG[static_cast<std::size_t>(e)] = divergence * localMass(g.area);
    Matrix3& mb = localB[static_cast<std::size_t>(e)];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        mb(i, j) = g.area * g.basisGradient[i].dot(B * g.basisGradient[j]);
      }
    }
  }
  return {{fromElementMatrices(mesh, localG), FormKind::VelocityMass},
          {fromElementMatrices(mesh, localB), FormKind::VelocityStiffness}};
}

VectorX assembleLoad(const SurfaceMesh& mesh,
                     const std::function<double(const Vector3&, double)>& f, int degree,
                     int threads) {
  const TriangleQuadrature& rule = triangleQuadrature(degree);
  const double t = mesh.time;
  const std::size_t ne = static_cast<std::size_t>(mesh.elementCount());
  std::vector<Vector3> partial(ne);
  parallelFor(ne, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      const Eigen::Vector3i tri = mesh.triangle(static_cast<int>(e));
      const ElementGeometry& g = mesh.elements[e];
      const Vector3 v0 = mesh.vertex(tri[0]);
      const Vector3 v1 = mesh.vertex(tri[1]);
      const Vector3 v2 = mesh.vertex(tri[2]);
      Vector3 acc = Vector3::Zero();
      for (int q = 0; q < rule.size(); ++q) {
        const auto bary = rule.barycentric.row(q);
        const Vector3 x = bary[0] * v0 + bary[1] * v1 + bary[2] * v2;
        const double w = rule.weights[q] * g.area * f(x, t);
        acc += w * Vector3(bary[0], bary[1], bary[2]);
      }
      partial[e] = acc;
    }
  });
  VectorX load = VectorX::Zero(mesh.vertexCount());
  for (std::size_t e = 0; e < ne; ++e) {
    const Eigen::Vector3i tri = mesh.triangle(static_cast<int>(e));
    for (int i = 0; i < 3; ++i) load[tri[i]] += partial[e][i];
  }
  return load;
}

ExactForms assembleExactForms(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                              const SpaceTimeField& u) {
  const double t = mesh.time;
  ExactForms forms;
  forms.massLoad = VectorX::Zero(mesh.vertexCount());
  forms.stiffnessLoad = VectorX::Zero(mesh.vertexCount());
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const ElementGeometry& g = mesh.elements[static_cast<std::size_t>(e)];
    const TriangleQuadrature& rule = triangleQuadrature(lifted.degree);
    for (int q = 0; q < lifted.pointsPerElement; ++q) {
      const LiftedPoint& lp = lifted.at(e, q);
      const double w = lp.weight * lp.measureRatio;
      const double uValue = u.value(lp.lifted, t);
      const Matrix3 P = Matrix3::Identity() - lp.normal * lp.normal.transpose();
      const Vector3 surfaceGrad = P * u.gradient(lp.lifted, t);
      const auto bary = rule.barycentric.row(q);
      for (int i = 0; i < 3; ++i) {
        forms.massLoad[tri[i]] += w * uValue * bary[i];
        forms.stiffnessLoad[tri[i]] +=
            w * surfaceGrad.dot(lp.liftGradient * g.basisGradient[i]);
      }
    }
  }
  return forms;
}

VectorX cgSolve(const SparseMatrix& matrix, const VectorX& rhs, double relTol,
                const VectorX* initialGuess) {
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      solver;
  solver.setTolerance(relTol);
  solver.setMaxIterations(10 * matrix.rows());
  solver.compute(matrix);
  VectorX x = initialGuess ? solver.solveWithGuess(rhs, *initialGuess)
                           : VectorX(solver.solve(rhs));
  if (solver.info() != Eigen::Success) {
    throw NumericError("cgSolve: no convergence after " +
                       std::to_string(solver.iterations()) +
                       " iterations (residual " + std::to_string(solver.error()) + ")");
  }
  return x;
}

}  // namespace esfem
