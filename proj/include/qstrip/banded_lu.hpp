#pragma once

#include <vector>

#include "qstrip/common.hpp"

namespace qstrip {

/// Square complex matrix with lower bandwidth p and upper bandwidth q,
/// stored row by row (row i holds columns i-p..i+q).
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(Index n, Index lower, Index upper);

  Index size() const { return n_; }
  Index lower() const { return p_; }
  Index upper() const { return q_; }
  bool in_band(Index i, Index j) const { return j >= i - p_ && j <= i + q_ && j >= 0 && j < n_; }

  Complex& operator()(Index i, Index j);
  Complex operator()(Index i, Index j) const;
  ComplexVector apply(const ComplexVector& x) const;

 private:
  friend class BandedLU;
  Index n_ = 0;
  Index p_ = 0;
  Index q_ = 0;
  std::vector<Complex> data_;
};

/// LU factorization without pivoting, computed in place on a copy.
class BandedLU {
 public:
  BandedLU() = default;
  /// Throws NumericalError on a zero pivot.
  explicit BandedLU(BandedMatrix a);

  ComplexVector solve(const ComplexVector& rhs) const;
  Index size() const { return lu_.size(); }

 private:
  BandedMatrix lu_;
};

}  // namespace qstrip
