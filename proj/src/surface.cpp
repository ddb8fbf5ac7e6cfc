#include "esfem/surface.hpp"

#include <cmath>
#include <numbers>

namespace esfem {

namespace {

constexpr double kPi = std::numbers::pi;

double fdStep(double step) { return step > 0 ? step : 1e-5; }

}  // namespace

SpaceTimeField withFiniteDifferences(SpaceTimeField field, double step) {
  const double h = fdStep(step);
  if (!field.value) throw DomainError("withFiniteDifferences: field.value is required");
  const auto value = field.value;
  if (!field.timeDerivative) {
    field.timeDerivative = [value, h](const Vector3& x, double t) {
      return (value(x, t + h) - value(x, t - h)) / (2 * h);
    };
  }
  if (!field.gradient) {
    field.gradient = [value, h](const Vector3& x, double t) {
      Vector3 g;
      for (int i = 0; i < 3; ++i) {
        Vector3 e = Vector3::Zero();
        e[i] = h;
        g[i] = (value(x + e, t) - value(x - e, t)) / (2 * h);
      }
      return g;
    };
  }
  if (!field.hessian) {
    const auto grad = field.gradient;
    field.hessian = [grad, h](const Vector3& x, double t) {
      Matrix3 m;
      for (int i = 0; i < 3; ++i) {
        Vector3 e = Vector3::Zero();
        e[i] = h;
        m.col(i) = (grad(x + e, t) - grad(x - e, t)) / (2 * h);
      }
      return Matrix3(0.5 * (m + m.transpose()));
    };
  }
  return field;
}

void EvolvingSurface::requireTime(double t) const {
  if (!(t >= timeBegin - 1e-14 && t <= timeEnd + 1e-14)) {
    throw DomainError("surface '" + name + "': time " + std::to_string(t) +
                      " outside [" + std::to_string(timeBegin) + ", " +
                      std::to_string(timeEnd) + "]");
  }
}

SurfacePointData closestPoint(const EvolvingSurface& surface, const Vector3& x, double t,
                              double tol, int maxIterations) {
  surface.requireTime(t);
  const double scale = 1.0 + x.norm();

  // Crude projection along the gradient to seed Newton.
  Vector3 p = x;
  for (int i = 0; i < 3; ++i) {
    const Vector3 g = surface.levelSetGradient(p, t);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-30) throw GeometryError("closestPoint: vanishing level-set gradient");
    p -= surface.levelSet(p, t) / g2 * g;
  }
  double lambda = (x - p).dot(surface.levelSetGradient(p, t)) /
                  surface.levelSetGradient(p, t).squaredNorm();

  int iterations = 0;
  for (; iterations < maxIterations; ++iterations) {
    const Vector3 g = surface.levelSetGradient(p, t);
    const Matrix3 Hphi = surface.levelSetHessian(p, t);
    Eigen::Vector4d F;
    F.head<3>() = p + lambda * g - x;
    F[3] = surface.levelSet(p, t);
    if (F.head<3>().norm() <= tol * scale && std::abs(F[3]) <= tol * scale) break;
    Eigen::Matrix4d J;
    J.topLeftCorner<3, 3>() = Matrix3::Identity() + lambda * Hphi;
    J.topRightCorner<3, 1>() = g;
    J.bottomLeftCorner<1, 3>() = g.transpose();
    J(3, 3) = 0.0;
    const Eigen::Vector4d step = J.fullPivLu().solve(F);
    p -= step.head<3>();
    lambda -= step[3];
    if (!p.allFinite()) throw GeometryError("closestPoint: iteration diverged");
  }
  if (iterations == maxIterations) {
    throw GeometryError("closestPoint: no convergence after " +
                        std::to_string(maxIterations) + " iterations");
  }

  SurfacePointData data;
  const Vector3 g = surface.levelSetGradient(p, t);
  const double gnorm = g.norm();
  data.point = p;
  data.normal = g / gnorm;
  data.signedDistance = lambda * gnorm;
  if (std::abs(data.signedDistance) > surface.reach) {
    throw GeometryError("closestPoint: point at distance " +
                        std::to_string(data.signedDistance) + " exceeds reach " +
                        std::to_string(surface.reach));
  }
  const Matrix3 P = Matrix3::Identity() - data.normal * data.normal.transpose();
  data.weingarten = P * surface.levelSetHessian(p, t) * P / gnorm;
  data.meanCurvature = data.weingarten.trace();
  data.iterations = iterations;
  return data;
}

Vector3 evaluateFlow(const EvolvingSurface& surface, const Vector3& p0, double t) {
  surface.requireTime(t);
  const double scale = 1.0 + p0.norm();
  if (std::abs(surface.levelSet(p0, surface.timeBegin)) > 1e-6 * scale) {
    throw GeometryError("evaluateFlow: seed point is not on the initial surface");
  }
  return surface.flowMap(p0, t);
}

Vector3 velocityAt(const EvolvingSurface& surface, const Vector3& x, double t) {
  surface.requireTime(t);
  return surface.velocity(x, t);
}

double surfaceDivergence(const EvolvingSurface& surface, const Vector3& x, double t) {
  const Vector3 g = surface.levelSetGradient(x, t);
  const Vector3 nu = g.normalized();
  const Matrix3 Dv = surface.velocityJacobian(x, t);
  return Dv.trace() - nu.dot(Dv * nu);
}

double laplaceBeltrami(const EvolvingSurface& surface, const SpaceTimeField& field,
                       const Vector3& x, double t) {
  const Vector3 g = surface.levelSetGradient(x, t);
  const double gnorm = g.norm();
  const Vector3 nu = g / gnorm;
  const Matrix3 P = Matrix3::Identity() - nu * nu.transpose();
  const double H = (P * surface.levelSetHessian(x, t)).trace() / gnorm;
  const Matrix3 Hf = field.hessian(x, t);
  const Vector3 gf = field.gradient(x, t);
  return Hf.trace() - nu.dot(Hf * nu) - H * nu.dot(gf);
}

double materialDerivative(const EvolvingSurface& surface, const SpaceTimeField& field,
                          const Vector3& x, double t) {
  return field.timeDerivative(x, t) + surface.velocity(x, t).dot(field.gradient(x, t));
}

double SurfaceProblem::forcing(const Vector3& x, double t) const {
  const EvolvingSurface& s = *surface;
  const double u = solution.value(x, t);
  return materialDerivative(s, solution, x, t) + u * surfaceDivergence(s, x, t) -
         laplaceBeltrami(s, solution, x, t);
}

namespace {

SpaceTimeField decayingProduct() {
  SpaceTimeField f;
  f.value = [](const Vector3& x, double t) { return x[0] * x[1] * std::exp(-6 * t); };
  f.timeDerivative = [](const Vector3& x, double t) {
    return -6 * x[0] * x[1] * std::exp(-6 * t);
  };
  f.gradient = [](const Vector3& x, double t) {
    return Vector3(x[1] * std::exp(-6 * t), x[0] * std::exp(-6 * t), 0.0);
  };
  f.hessian = [](const Vector3&, double t) {
    Matrix3 m = Matrix3::Zero();
    m(0, 1) = m(1, 0) = std::exp(-6 * t);
    return m;
  };
  return f;
}

EvolvingSurface makeStaticSphere() {
  EvolvingSurface s;
  s.name = "sphere-static";
  s.levelSet = [](const Vector3& x, double) { return x.squaredNorm() - 1.0; };
  s.levelSetGradient = [](const Vector3& x, double) { return Vector3(2 * x); };
  s.levelSetHessian = [](const Vector3&, double) { return Matrix3(2 * Matrix3::Identity()); };
  s.flowMap = [](const Vector3& p, double) { return p; };
  s.velocity = [](const Vector3&, double) { return Vector3::Zero().eval(); };
  s.velocityJacobian = [](const Vector3&, double) { return Matrix3::Zero().eval(); };
  return s;
}

// Axis scale a(t) = sqrt(1 + sin(2 pi t)/4) and its logarithmic derivative
// a'(t)/a(t) = pi cos(2 pi t) / (4 + sin(2 pi t)).
double axisScaleSquared(double t) { return 1.0 + 0.25 * std::sin(2 * kPi * t); }
double axisLogDerivative(double t) {
  return kPi * std::cos(2 * kPi * t) / (4.0 + std::sin(2 * kPi * t));
}

EvolvingSurface makeScaledEllipsoid() {
  EvolvingSurface s;
  s.name = "ellipsoid-§7";
  s.levelSet = [](const Vector3& x, double t) {
    return x[0] * x[0] / axisScaleSquared(t) + x[1] * x[1] + x[2] * x[2] - 1.0;
  };
  s.levelSetGradient = [](const Vector3& x, double t) {
    return Vector3(2 * x[0] / axisScaleSquared(t), 2 * x[1], 2 * x[2]);
  };
  s.levelSetHessian = [](const Vector3&, double t) {
    Matrix3 m = Matrix3::Zero();
    m(0, 0) = 2.0 / axisScaleSquared(t);
    m(1, 1) = m(2, 2) = 2.0;
    return m;
  };
  s.flowMap = [](const Vector3& p, double t) {
    return Vector3(std::sqrt(axisScaleSquared(t)) * p[0], p[1], p[2]);
  };
  s.velocity = [](const Vector3& x, double t) {
    return Vector3(axisLogDerivative(t) * x[0], 0.0, 0.0);
  };
  s.velocityJacobian = [](const Vector3&, double t) {
    Matrix3 m = Matrix3::Zero();
    m(0, 0) = axisLogDerivative(t);
    return m;
  };
  return s;
}

SurfaceProblem makeProblem(EvolvingSurface surface) {
  SurfaceProblem p;
  p.surface = std::make_shared<EvolvingSurface>(std::move(surface));
  p.solution = decayingProduct();
  return p;
}

}  // namespace

const SurfaceProblem& builtinProblem(const std::string& name) {
  static const SurfaceProblem sphere = makeProblem(makeStaticSphere());
  static const SurfaceProblem ellipsoid = makeProblem(makeScaledEllipsoid());
  if (name == "sphere-static") return sphere;
  if (name == "ellipsoid-§7" || name == "ellipsoid") return ellipsoid;
  throw ValidationError("unknown builtin problem '" + name + "'");
}

std::vector<std::string> builtinProblemNames() { return {"sphere-static", "ellipsoid-§7"}; }

EvolvingSurface makePlane() {
  EvolvingSurface s;
  s.name = "plane-fixture";
  s.levelSet = [](const Vector3& x, double) { return x[2]; };
  s.levelSetGradient = [](const Vector3&, double) { return Vector3(0, 0, 1).eval(); };
  s.levelSetHessian = [](const Vector3&, double) { return Matrix3::Zero().eval(); };
  s.flowMap = [](const Vector3& p, double) { return p; };
  s.velocity = [](const Vector3&, double) { return Vector3::Zero().eval(); };
  s.velocityJacobian = [](const Vector3&, double) { return Matrix3::Zero().eval(); };
  s.reach = 1.0;
  return s;
}

}  // namespace esfem
