#pragma once

#include <functional>
#include <optional>

#include "esfem/assembly.hpp"
#include "esfem/fe.hpp"
#include "esfem/mesh.hpp"
#include "esfem/surface.hpp"

namespace esfem {

// Localization weights anchored at a surface point y:
//   Parabolic    mu(x) = |x - y|^2 + rho^2, rho^2 = gamma h^2 |log h|
//                (clamped to gamma h^2 when h >= 1 so rho stays positive)
//   Regularized  mu(x) = sqrt(|x - y|^2 + h^2)
// Weighted norms integrate mu^(-alpha) |.|^2.
enum class WeightKind { Parabolic, Regularized };

struct WeightSpec {
  WeightKind kind = WeightKind::Parabolic;
  Vector3 anchor = Vector3::Zero();
  double gamma = 1.0;
  double h = 0.1;
  double alpha = 1.0;

  double rhoSquared() const;
  double value(const Vector3& x) const;
};

// Error norms of a finite element function against an ambient exact field,
// measured on Gamma(t) through the lift:
//   l2, h1Semi      from a lifted integral rule (degree 6 recommended)
//   linf, w1infSemi from sampling vertices plus the interior rule points.
struct ErrorNorms {
  double l2 = 0.0;
  double h1Semi = 0.0;
  double linf = 0.0;
  double w1infSemi = 0.0;
};

// Integral error norms; exact may omit the hessian.
void accumulateIntegralNorms(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                             const VectorX& coefficients, const SpaceTimeField& exact,
                             ErrorNorms& out);

// Sup error norms from vertex + interior sampling (rule of the given lifted
// quadrature; degree 4 recommended).
void accumulateSupNorms(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                        const VectorX& coefficients, const SpaceTimeField& exact,
                        ErrorNorms& out);

ErrorNorms errorNorms(const SurfaceMesh& mesh, const LiftedQuadrature& integralRule,
                      const LiftedQuadrature& samplingRule, const VectorX& coefficients,
                      const SpaceTimeField& exact);

// Weighted L2 and H1-seminorm errors: integral of mu^(-alpha) |u - u_h|^2
// (and of the tangential gradient difference). The weight is evaluated at the
// lifted points.
double weightedL2ErrorSquared(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                              const VectorX& coefficients, const SpaceTimeField& exact,
                              const WeightSpec& weight);
double weightedH1ErrorSquared(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                              const VectorX& coefficients, const SpaceTimeField& exact,
                              const WeightSpec& weight);

// Plain norms of a finite element function on Gamma_h(t) (no lift):
double feL2Norm(const SurfaceMesh& mesh, const VectorX& coefficients);
double feL1Norm(const SurfaceMesh& mesh, const VectorX& coefficients, int degree = 4);
double feLinfNorm(const VectorX& coefficients);
// Weighted L2 norm on Gamma_h (weight at the flat quadrature points).
double feWeightedL2Norm(const SurfaceMesh& mesh, const VectorX& coefficients,
                        const WeightSpec& weight, int degree = 4);

// |log h| convention used by the weights and the log-factor diagnostics.
double logFactor(double h);

}  // namespace esfem
