#pragma once

#include <functional>

#include "esfem/assembly.hpp"
#include "esfem/fe.hpp"

namespace esfem {

// L2 projection onto the nodal space: solves M p = (f, chi_j). The input is
// sampled at the quadrature points of the given degree (so non-finite-element
// data is admissible).
VectorX l2Project(const SurfaceMesh& mesh,
                  const std::function<double(int, int, const Vector3&)>& sample,
                  int degree = 4);
VectorX l2Project(const SurfaceMesh& mesh,
                  const std::function<double(const Vector3&, double)>& f, int degree = 4);

// Ritz map: the finite element function r with
//   (grad r, grad chi)_h + (r, chi)_h = a(u, chi^lift) + m(u, chi^lift)
// for all nodal basis functions chi, the right side living on Gamma(t).
VectorX ritzMap(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                const SpaceTimeField& u);

// Time derivative of the Ritz coefficients along the mesh evolution, by a
// centered difference of step dt on the advected meshes (one-sided
// second-order difference at the ends of the time interval; sets
// *oneSidedWarning when provided). The result is carried by the mesh at the
// evaluation time.
VectorX ritzMaterialDerivative(const SurfaceMesh& mesh, const SpaceTimeField& u,
                               double dt = 1e-4, int liftedDegree = 6,
                               bool* oneSidedWarning = nullptr);

// Discrete delta at a surface point x_h in Gamma_h(t): solves M d = e(x_h)
// where e_j = chi_j(x_h).
VectorX discreteDelta(const SurfaceMesh& mesh, const Vector3& xh);

// Discrete Green's function: (A + M) g = e(x_h).
VectorX discreteGreen(const SurfaceMesh& mesh, const Vector3& xh);

// Nodal evaluation vector e_j = chi_j(x_h).
VectorX nodalEvaluation(const SurfaceMesh& mesh, const Vector3& xh);

}  // namespace esfem
