#pragma once

#include "qstrip/common.hpp"

namespace qstrip {

/// Complex tridiagonal matrix; row i reads sub(i) x(i-1) + diag(i) x(i) + sup(i) x(i+1).
/// sub(0) and sup(n-1) are ignored.
struct TridiagonalSystem {
  ComplexVector sub;
  ComplexVector diag;
  ComplexVector sup;

  Index size() const { return diag.size(); }
  ComplexVector apply(const ComplexVector& x) const;
  Eigen::MatrixXcd dense() const;
};

/// Thomas elimination without pivoting, factored once and reused.
class TridiagonalFactorization {
 public:
  TridiagonalFactorization() = default;
  explicit TridiagonalFactorization(const TridiagonalSystem& system);

  ComplexVector solve(const ComplexVector& rhs) const;
  Index size() const { return inv_pivot_.size(); }
  const ComplexVector& sub() const { return sub_; }
  const ComplexVector& inv_pivot() const { return inv_pivot_; }
  const ComplexVector& sup_scaled() const { return sup_scaled_; }

 private:
  ComplexVector sub_;
  ComplexVector inv_pivot_;
  ComplexVector sup_scaled_;
};

/// Throws NumericalError on a zero pivot (reported with its row).
ComplexVector solve_tridiagonal(const TridiagonalSystem& system, const ComplexVector& rhs);

}  // namespace qstrip
