#include "esfem/quadrature.hpp"

#include <array>

namespace esfem {

namespace {

TriangleQuadrature makeDegree2() {
  TriangleQuadrature q;
  q.degree = 2;
  q.barycentric.resize(3, 3);
  q.weights.resize(3);
  const double a = 2.0 / 3.0, b = 1.0 / 6.0;
  q.barycentric << a, b, b, b, a, b, b, b, a;
  q.weights.setConstant(1.0 / 3.0);
  return q;
}

// Appends the three (or six, when all entries differ) permutations of a
// barycentric triple with a shared weight.
void appendOrbit(std::vector<std::array<double, 3>>& pts, std::vector<double>& ws, double w,
                 double a, double b, double c) {
  const std::array<std::array<double, 3>, 6> perms = {{{a, b, c},
                                                       {b, c, a},
                                                       {c, a, b},
                                                       {a, c, b},
                                                       {b, a, c},
                                                       {c, b, a}}};
  const int count = (a == b || b == c || a == c) ? 3 : 6;
  for (int i = 0; i < count; ++i) {
    pts.push_back(perms[static_cast<std::size_t>(i)]);
    ws.push_back(w);
  }
}

TriangleQuadrature fromOrbits(int degree, const std::vector<std::array<double, 3>>& pts,
                              const std::vector<double>& ws) {
  TriangleQuadrature q;
  q.degree = degree;
  const int n = static_cast<int>(pts.size());
  q.barycentric.resize(n, 3);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) q.barycentric(i, c) = pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    q.weights[i] = ws[static_cast<std::size_t>(i)];
  }
  return q;
}

TriangleQuadrature makeDegree4() {
  std::vector<std::array<double, 3>> pts;
  std::vector<double> ws;
  appendOrbit(pts, ws, 0.223381589678011, 0.445948490915965, 0.445948490915965,
              0.108103018168070);
  appendOrbit(pts, ws, 0.109951743655322, 0.091576213509771, 0.091576213509771,
              0.816847572980458);
  return fromOrbits(4, pts, ws);
}

TriangleQuadrature makeDegree6() {
  std::vector<std::array<double, 3>> pts;
  std::vector<double> ws;
  appendOrbit(pts, ws, 0.116786275726379, 0.249286745170910, 0.249286745170910,
              0.501426509658180);
  appendOrbit(pts, ws, 0.050844906370207, 0.063089014491502, 0.063089014491502,
              0.873821971016996);
  appendOrbit(pts, ws, 0.082851075618374, 0.310352451033785, 0.636502499121399,
              0.053145049844816);
  return fromOrbits(6, pts, ws);
}

}  // namespace

const TriangleQuadrature& triangleQuadrature(int degree) {
  static const TriangleQuadrature q2 = makeDegree2();
  static const TriangleQuadrature q4 = makeDegree4();
  static const TriangleQuadrature q6 = makeDegree6();
  switch (degree) {
    case 2:
      return q2;
    case 4:
      return q4;
    case 6:
      return q6;
    default:
      throw DomainError("triangleQuadrature: degree must be 2, 4 or 6, got " +
                        std::to_string(degree));
  }
}

}  // namespace esfem
