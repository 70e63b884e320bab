// leowb/types.hpp
//
// Common value types and the error hierarchy shared by every module.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace leowb {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Thrown when a Hermitian factorization reports a condition estimate above
/// the inversion limit.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// The r x r Woodbury capacitance matrix is too ill-conditioned to invert.
/// Callers are expected to fall back to a direct inversion.
class SingularAuxiliary : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnsupportedGeometry : public Error {
 public:
  using Error::Error;
};

class BelowMinElevation : public Error {
 public:
  using Error::Error;
};

class ZeroPrecoder : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Relative Frobenius distance ||a - b||_F / max(||b||_F, tiny).
inline double relative_frobenius(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double denom = b.norm();
  return (a - b).norm() / (denom > 0.0 ? denom : 1.0);
}

/// ||A - A^H||_F / ||A||_F (0 for the zero matrix).
inline double hermitian_defect(const ComplexMatrix& a) {
  const double n = a.norm();
  if (n == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / n;
}

}  // namespace leowb
