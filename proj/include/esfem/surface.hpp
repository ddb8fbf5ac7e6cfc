#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "esfem/types.hpp"

namespace esfem {

// Scalar space-time field defined on (a neighbourhood of) the surface, with
// the ambient derivatives needed for tangential calculus. Closed forms where
// available; withFiniteDifferences synthesizes missing derivatives.
struct SpaceTimeField {
  std::function<double(const Vector3&, double)> value;
  std::function<double(const Vector3&, double)> timeDerivative;
  std::function<Vector3(const Vector3&, double)> gradient;
  std::function<Matrix3(const Vector3&, double)> hessian;
};

// Fills any missing derivative closures of `field` with centered finite
// differences of `value` (step `step`).
SpaceTimeField withFiniteDifferences(SpaceTimeField field, double step = 1e-5);

// A closed surface family Gamma(t) = {x : levelSet(x, t) = 0}, transported by
// the flow map x(t) = flowMap(x(0), t) with material velocity
// velocity(x(t), t) = d/dt flowMap. The level-set gradient points outward.
struct EvolvingSurface {
  std::string name;
  std::function<double(const Vector3&, double)> levelSet;
  std::function<Vector3(const Vector3&, double)> levelSetGradient;
  std::function<Matrix3(const Vector3&, double)> levelSetHessian;
  std::function<Vector3(const Vector3&, double)> flowMap;
  std::function<Vector3(const Vector3&, double)> velocity;
  std::function<Matrix3(const Vector3&, double)> velocityJacobian;
  double timeBegin = 0.0;
  double timeEnd = 1.0;
  // Closest-point queries are accepted within this distance of the surface.
  double reach = 0.2;

  void requireTime(double t) const;
};

// Data of the normal projection of a nearby point x onto Gamma(t):
// x = point + signedDistance * normal, signedDistance > 0 outside.
struct SurfacePointData {
  Vector3 point;
  double signedDistance = 0.0;
  Vector3 normal;
  // Shape operator extended by zero on the normal: weingarten * normal = 0.
  Matrix3 weingarten;
  double meanCurvature = 0.0;  // trace of weingarten; 2 on the unit sphere
  int iterations = 0;
};

// Newton solve of { p + lambda * grad(p) = x, levelSet(p) = 0 } along the
// level-set gradient. Throws GeometryError when x is farther than
// surface.reach from Gamma(t) or the iteration fails, DomainError for t
// outside [timeBegin, timeEnd].
SurfacePointData closestPoint(const EvolvingSurface& surface, const Vector3& x, double t,
                              double tol = 1e-12, int maxIterations = 50);

// Flow-map evaluation with domain checks: p0 must satisfy the t=0 level-set
// equation to tolerance, t must lie in the surface's time interval.
Vector3 evaluateFlow(const EvolvingSurface& surface, const Vector3& p0, double t);

// Material velocity at a point of Gamma(t).
Vector3 velocityAt(const EvolvingSurface& surface, const Vector3& x, double t);

// Tangential divergence div_G v = div v - nu^T (grad v) nu at x near Gamma(t).
double surfaceDivergence(const EvolvingSurface& surface, const Vector3& x, double t);

// Laplace-Beltrami of the restriction of `field` to Gamma(t), evaluated via
// the ambient identity lap_G f = lap f - nu^T Hess(f) nu - H nu . grad f,
// with nu and H taken from the level set at x (valid near the surface).
double laplaceBeltrami(const EvolvingSurface& surface, const SpaceTimeField& field,
                       const Vector3& x, double t);

// Material derivative d/dt f + v . grad f along the surface velocity.
double materialDerivative(const EvolvingSurface& surface, const SpaceTimeField& field,
                          const Vector3& x, double t);

// A surface paired with a known exact solution of
//   (material derivative) u + u div_G v - lap_G u = f on Gamma(t),
// where f := forcing is derived from the solution via the ambient formulas.
struct SurfaceProblem {
  std::shared_ptr<const EvolvingSurface> surface;
  SpaceTimeField solution;

  // Forcing evaluated from ambient derivatives; smooth near Gamma(t) and
  // exact on it.
  double forcing(const Vector3& x, double t) const;
};

// Builtin problems, addressable from the CLI:
//   "sphere-static"  unit sphere, zero velocity, u = x y exp(-6 t)
//   "ellipsoid-§7"   x^2/a(t)^2 + y^2 + z^2 = 1 with a(t)^2 = 1 + sin(2 pi t)/4,
//                    u = x y exp(-6 t)   (alias: "ellipsoid")
const SurfaceProblem& builtinProblem(const std::string& name);
std::vector<std::string> builtinProblemNames();

// Test fixtures. The plane z = 0 (static, infinite reach direction z).
EvolvingSurface makePlane();

}  // namespace esfem
