#include "qstrip/banded_lu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qstrip {

BandedMatrix::BandedMatrix(Index n, Index lower, Index upper)
    : n_(n), p_(lower), q_(upper), data_(static_cast<std::size_t>(n * (lower + upper + 1)), Complex(0.0)) {
  require(n > 0 && lower >= 0 && upper >= 0, "banded matrix: bad shape");
}

Complex& BandedMatrix::operator()(Index i, Index j) {
  if (!in_band(i, j)) throw ValidationError("banded matrix: entry outside the band");
  return data_[static_cast<std::size_t>(i * (p_ + q_ + 1) + (j - i + p_))];
}

Complex BandedMatrix::operator()(Index i, Index j) const {
  if (!in_band(i, j)) return 0.0;
  return data_[static_cast<std::size_t>(i * (p_ + q_ + 1) + (j - i + p_))];
}

ComplexVector BandedMatrix::apply(const ComplexVector& x) const {
  if (x.size() != n_) throw ValidationError("banded matrix: length mismatch");
  ComplexVector y(n_);
  for (Index i = 0; i < n_; ++i) {
    Complex s = 0.0;
    for (Index j = std::max<Index>(0, i - p_); j <= std::min(n_ - 1, i + q_); ++j) s += (*this)(i, j) * x(j);
    y(i) = s;
  }
  return y;
}

BandedLU::BandedLU(BandedMatrix a) : lu_(std::move(a)) {
  const Index n = lu_.n_, p = lu_.p_, q = lu_.q_, w = p + q + 1;
  Complex* d = lu_.data_.data();
  Real scale = 0.0;
  for (const Complex& v : lu_.data_) scale = std::max(scale, std::abs(v));
  const Real tiny = std::numeric_limits<Real>::epsilon() * std::max(scale, std::numeric_limits<Real>::min());
  for (Index k = 0; k < n; ++k) {
    const Complex pivot = d[k * w + p];
    if (!(std::abs(pivot) > tiny))
      throw NumericalError("banded LU: zero pivot at row " + std::to_string(k) + " of " + std::to_string(n));
    const Complex inv = 1.0 / pivot;
    const Index jmax = std::min(n - 1, k + q);
    for (Index i = k + 1; i <= std::min(n - 1, k + p); ++i) {
      Complex& lik = d[i * w + (k - i + p)];
      if (lik == 0.0) continue;
      lik *= inv;
      const Complex l = lik;
      Complex* ri = d + i * w + p - i;
      const Complex* rk = d + k * w + p - k;
      for (Index j = k + 1; j <= jmax; ++j) ri[j] -= l * rk[j];
    }
  }
}

ComplexVector BandedLU::solve(const ComplexVector& rhs) const {
  const Index n = lu_.n_, p = lu_.p_, q = lu_.q_, w = p + q + 1;
  if (rhs.size() != n) throw ValidationError("banded LU: length mismatch");
  const Complex* d = lu_.data_.data();
  ComplexVector x = rhs;
  for (Index i = 0; i < n; ++i) {
    Complex s = x(i);
    for (Index j = std::max<Index>(0, i - p); j < i; ++j) s -= d[i * w + (j - i + p)] * x(j);
    x(i) = s;
  }
  for (Index i = n - 1; i >= 0; --i) {
    Complex s = x(i);
    for (Index j = i + 1; j <= std::min(n - 1, i + q); ++j) s -= d[i * w + (j - i + p)] * x(j);
    x(i) = s / d[i * w + p];
  }
  return x;
}

}  // namespace qstrip
