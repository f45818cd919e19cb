#include "qstrip/tridiagonal.hpp"

#include <cmath>
#include <limits>

namespace qstrip {

ComplexVector TridiagonalSystem::apply(const ComplexVector& x) const {
  const Index n = size();
  if (x.size() != n) throw ValidationError("tridiagonal apply: length mismatch");
  ComplexVector y(n);
  for (Index i = 0; i < n; ++i) {
    Complex s = diag(i) * x(i);
    if (i > 0) s += sub(i) * x(i - 1);
    if (i + 1 < n) s += sup(i) * x(i + 1);
    y(i) = s;
  }
  return y;
}

Eigen::MatrixXcd TridiagonalSystem::dense() const {
  const Index n = size();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) = diag(i);
    if (i > 0) a(i, i - 1) = sub(i);
    if (i + 1 < n) a(i, i + 1) = sup(i);
  }
  return a;
}

TridiagonalFactorization::TridiagonalFactorization(const TridiagonalSystem& s) {
  const Index n = s.size();
  if (n == 0 || s.sub.size() != n || s.sup.size() != n) throw ValidationError("tridiagonal system: bad shape");
  sub_ = s.sub;
  inv_pivot_.resize(n);
  sup_scaled_.resize(n);
  Real scale = 0.0;
  for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(s.diag(i)));
  const Real tiny = std::numeric_limits<Real>::epsilon() * std::max(scale, std::numeric_limits<Real>::min());
  Complex prev_sup = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Complex pivot = i == 0 ? s.diag(0) : s.diag(i) - s.sub(i) * prev_sup;
    if (!(std::abs(pivot) > tiny))
      throw NumericalError("tridiagonal solve: zero pivot at row " + std::to_string(i) + " of " + std::to_string(n));
    inv_pivot_(i) = 1.0 / pivot;
    prev_sup = i + 1 < n ? s.sup(i) * inv_pivot_(i) : Complex(0.0);
    sup_scaled_(i) = prev_sup;
  }
}

ComplexVector TridiagonalFactorization::solve(const ComplexVector& rhs) const {
  const Index n = size();
  if (rhs.size() != n) throw ValidationError("tridiagonal solve: length mismatch");
  ComplexVector x(n);
  x(0) = rhs(0) * inv_pivot_(0);
  for (Index i = 1; i < n; ++i) x(i) = (rhs(i) - sub_(i) * x(i - 1)) * inv_pivot_(i);
  for (Index i = n - 2; i >= 0; --i) x(i) -= sup_scaled_(i) * x(i + 1);
  return x;
}

ComplexVector solve_tridiagonal(const TridiagonalSystem& system, const ComplexVector& rhs) {
  return TridiagonalFactorization(system).solve(rhs);
}

}  // namespace qstrip
