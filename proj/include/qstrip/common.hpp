#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qstrip {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;

inline constexpr Complex I{0.0, 1.0};

/// Grid arrays are stored row-major with the x index j as the row and the
/// y index k as the column, so one x-slice (fixed j) is contiguous in k.
using Field = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealGrid = Eigen::Array<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Bad input: malformed meshes, inconsistent coefficients, bad configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: zero pivots, failed eigen-solves, ill-posed symbols.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace qstrip
