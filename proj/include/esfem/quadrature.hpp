#pragma once

#include <Eigen/Dense>

#include "esfem/types.hpp"

namespace esfem {

// Symmetric Gauss rules on the reference triangle in barycentric coordinates.
// Weights sum to one; multiply by the element area when integrating.
struct TriangleQuadrature {
  int degree = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 3> barycentric;
  VectorX weights;

  int size() const { return static_cast<int>(weights.size()); }
};

// Rules of polynomial exactness degree 2 (3 points), 4 (6 points) and
// 6 (12 points). Other degrees raise DomainError.
const TriangleQuadrature& triangleQuadrature(int degree);

}  // namespace esfem
