#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace esfem {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3>;

// Error taxonomy. Domain: arguments outside their documented ranges.
// Geometry: closest-point / lift failures. Mesh: connectivity or element
// quality violations. Numeric: solver breakdown or non-convergence.
// Validation: malformed CLI/config input.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct MeshError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};
struct ValidationError : Error {
  using Error::Error;
};

}  // namespace esfem
