#pragma once

#include <functional>

#include "esfem/fe.hpp"
#include "esfem/mesh.hpp"
#include "esfem/surface.hpp"

namespace esfem {

enum class FormKind { Mass, Stiffness, VelocityMass, VelocityStiffness };

// Sparse symmetric bilinear form on the nodal basis of a SurfaceMesh.
struct SparseSymmetricForm {
  SparseMatrix matrix;
  FormKind kind = FormKind::Mass;

  int dim() const { return static_cast<int>(matrix.rows()); }
  VectorX apply(const VectorX& x) const { return matrix * x; }
  double inner(const VectorX& z, const VectorX& phi) const { return z.dot(matrix * phi); }
};

// Mass matrix: integrals of chi_i chi_j over the flat elements (exact).
SparseSymmetricForm assembleMass(const SurfaceMesh& mesh);

// Stiffness matrix: tangential gradients are elementwise constant (exact).
SparseSymmetricForm assembleStiffness(const SurfaceMesh& mesh);

// Forms carrying the interpolated material velocity V (rows = vertices):
//   g(i,j) = integral of div_G(V) chi_i chi_j
//   b(i,j) = integral of grad chi_i . B(V) grad chi_j,
//   B(V) = div_G(V) I - (tangential Jacobian + transpose).
// Both integrands are polynomial on each element, so assembly is exact.
struct VelocityForms {
  SparseSymmetricForm g;
  SparseSymmetricForm b;
};
VelocityForms assembleVelocityForms(const SurfaceMesh& mesh, const Points3& nodalVelocity);

// Nodal velocity of the mesh evolution: velocity(vertex_j, t).
Points3 interpolateVelocity(const SurfaceMesh& mesh);

// Load vector F_j = integral over Gamma_h of f(x, t) chi_j, by quadrature of
// the given degree.
VectorX assembleLoad(const SurfaceMesh& mesh,
                     const std::function<double(const Vector3&, double)>& f, int degree = 4,
                     int threads = 1);

// Exact-surface functionals of an ambient field u against lifted basis
// functions, via the lifted quadrature rule:
//   massLoad_j      = integral over Gamma(t) of u chi_j^lift
//   stiffnessLoad_j = integral over Gamma(t) of grad_G u . grad_G chi_j^lift
struct ExactForms {
  VectorX massLoad;
  VectorX stiffnessLoad;
};
ExactForms assembleExactForms(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                              const SpaceTimeField& u);

// Preconditioned conjugate-gradient solve (diagonal preconditioner) for
// symmetric positive (semi)definite systems; relative tolerance on the
// residual, at most 10 * dim iterations. Throws NumericError on breakdown.
VectorX cgSolve(const SparseMatrix& matrix, const VectorX& rhs, double relTol = 1e-12,
                const VectorX* initialGuess = nullptr);

}  // namespace esfem
