#include "esfem/norms.hpp"

#include <cmath>

#include "esfem/quadrature.hpp"

namespace esfem {

double logFactor(double h) {
  if (!(h > 0)) throw DomainError("logFactor: h must be positive");
  return std::abs(std::log(h));
}

double WeightSpec::rhoSquared() const {
  if (!(h > 0)) throw DomainError("WeightSpec: h must be positive");
  const double factor = h >= 1.0 ? 1.0 : logFactor(h);
  return gamma * h * h * factor;
}

double WeightSpec::value(const Vector3& x) const {
  const double r2 = (x - anchor).squaredNorm();
  switch (kind) {
    case WeightKind::Parabolic:
      return r2 + rhoSquared();
    case WeightKind::Regularized:
      return std::sqrt(r2 + h * h);
  }
  throw DomainError("WeightSpec: unknown kind");
}

namespace {

// Shared element walk: for every lifted point, hand the FE value/gradient and
// the exact value/tangential gradient at the lifted point to a sink.
template <typename Sink>
void forEachLiftedError(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                        const VectorX& coefficients, const SpaceTimeField& exact,
                        Sink&& sink) {
  const TriangleQuadrature& rule = triangleQuadrature(lifted.degree);
  const double t = mesh.time;
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const ElementGeometry& g = mesh.elements[static_cast<std::size_t>(e)];
    const Vector3 feGrad = coefficients[tri[0]] * g.basisGradient[0] +
                           coefficients[tri[1]] * g.basisGradient[1] +
                           coefficients[tri[2]] * g.basisGradient[2];
    for (int q = 0; q < lifted.pointsPerElement; ++q) {
      const LiftedPoint& lp = lifted.at(e, q);
      const auto bary = rule.barycentric.row(q);
      const double feValue = bary[0] * coefficients[tri[0]] +
                             bary[1] * coefficients[tri[1]] +
                             bary[2] * coefficients[tri[2]];
      const double exactValue = exact.value(lp.lifted, t);
      const Matrix3 P = Matrix3::Identity() - lp.normal * lp.normal.transpose();
      const Vector3 exactGrad = P * exact.gradient(lp.lifted, t);
      const Vector3 liftedFeGrad = lp.liftGradient * feGrad;
      sink(lp, feValue - exactValue, Vector3(liftedFeGrad - exactGrad));
    }
  }
}

}  // namespace

void accumulateIntegralNorms(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                             const VectorX& coefficients, const SpaceTimeField& exact,
                             ErrorNorms& out) {
  double l2 = 0.0, h1 = 0.0;
  forEachLiftedError(mesh, lifted, coefficients, exact,
                     [&](const LiftedPoint& lp, double err, const Vector3& gradErr) {
                       const double w = lp.weight * lp.measureRatio;
                       l2 += w * err * err;
                       h1 += w * gradErr.squaredNorm();
                     });
  out.l2 = std::sqrt(l2);
  out.h1Semi = std::sqrt(h1);
}

void accumulateSupNorms(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                        const VectorX& coefficients, const SpaceTimeField& exact,
                        ErrorNorms& out) {
  double linf = 0.0, w1inf = 0.0;
  // Vertices lie on Gamma(t), so the lift is the identity there.
  for (int j = 0; j < mesh.vertexCount(); ++j) {
    linf = std::max(linf,
                    std::abs(coefficients[j] - exact.value(mesh.vertex(j), mesh.time)));
  }
  forEachLiftedError(mesh, lifted, coefficients, exact,
                     [&](const LiftedPoint&, double err, const Vector3& gradErr) {
                       linf = std::max(linf, std::abs(err));
                       w1inf = std::max(w1inf, gradErr.norm());
                     });
  out.linf = linf;
  out.w1infSemi = w1inf;
}

ErrorNorms errorNorms(const SurfaceMesh& mesh, const LiftedQuadrature& integralRule,
                      const LiftedQuadrature& samplingRule, const VectorX& coefficients,
                      const SpaceTimeField& exact) {
  ErrorNorms out;
  accumulateIntegralNorms(mesh, integralRule, coefficients, exact, out);
  accumulateSupNorms(mesh, samplingRule, coefficients, exact, out);
  return out;
}

double weightedL2ErrorSquared(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                              const VectorX& coefficients, const SpaceTimeField& exact,
                              const WeightSpec& weight) {
  double acc = 0.0;
  forEachLiftedError(mesh, lifted, coefficients, exact,
                     [&](const LiftedPoint& lp, double err, const Vector3&) {
                       const double w = lp.weight * lp.measureRatio;
                       acc += w * std::pow(weight.value(lp.lifted), -weight.alpha) * err * err;
                     });
  return acc;
}

double weightedH1ErrorSquared(const SurfaceMesh& mesh, const LiftedQuadrature& lifted,
                              const VectorX& coefficients, const SpaceTimeField& exact,
                              const WeightSpec& weight) {
  double acc = 0.0;
  forEachLiftedError(mesh, lifted, coefficients, exact,
                     [&](const LiftedPoint& lp, double, const Vector3& gradErr) {
                       const double w = lp.weight * lp.measureRatio;
                       acc += w * std::pow(weight.value(lp.lifted), -weight.alpha) *
                              gradErr.squaredNorm();
                     });
  return acc;
}

double feL2Norm(const SurfaceMesh& mesh, const VectorX& coefficients) {
  const SparseSymmetricForm mass = assembleMass(mesh);
  return std::sqrt(std::max(0.0, mass.inner(coefficients, coefficients)));
}

double feL1Norm(const SurfaceMesh& mesh, const VectorX& coefficients, int degree) {
  const TriangleQuadrature& rule = triangleQuadrature(degree);
  double acc = 0.0;
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const double area = mesh.elements[static_cast<std::size_t>(e)].area;
    for (int q = 0; q < rule.size(); ++q) {
      const auto bary = rule.barycentric.row(q);
      const double v = bary[0] * coefficients[tri[0]] + bary[1] * coefficients[tri[1]] +
                       bary[2] * coefficients[tri[2]];
      acc += rule.weights[q] * area * std::abs(v);
    }
  }
  return acc;
}

double feLinfNorm(const VectorX& coefficients) {
  return coefficients.size() == 0 ? 0.0 : coefficients.cwiseAbs().maxCoeff();
}

double feWeightedL2Norm(const SurfaceMesh& mesh, const VectorX& coefficients,
                        const WeightSpec& weight, int degree) {
  const TriangleQuadrature& rule = triangleQuadrature(degree);
  double acc = 0.0;
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const Eigen::Vector3i tri = mesh.triangle(e);
    const ElementGeometry& g = mesh.elements[static_cast<std::size_t>(e)];
    const Vector3 v0 = mesh.vertex(tri[0]);
    const Vector3 v1 = mesh.vertex(tri[1]);
    const Vector3 v2 = mesh.vertex(tri[2]);
    for (int q = 0; q < rule.size(); ++q) {
      const auto bary = rule.barycentric.row(q);
      const Vector3 x = bary[0] * v0 + bary[1] * v1 + bary[2] * v2;
      const double v = bary[0] * coefficients[tri[0]] + bary[1] * coefficients[tri[1]] +
                       bary[2] * coefficients[tri[2]];
      acc += rule.weights[q] * g.area * std::pow(weight.value(x), -weight.alpha) * v * v;
    }
  }
  return std::sqrt(acc);
}

}  // namespace esfem
