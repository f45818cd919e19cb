#include <random>

#include "doctest.h"
#include "qstrip/tridiagonal.hpp"

using namespace qstrip;

namespace {

ComplexVector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<Real> d;
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(d(rng), d(rng));
  return v;
}

}  // namespace

TEST_CASE("identity system returns the right-hand side") {
  TridiagonalSystem s{ComplexVector::Zero(5), ComplexVector::Ones(5), ComplexVector::Zero(5)};
  std::mt19937_64 rng(1);
  const ComplexVector b = random_vector(5, rng);
  CHECK((solve_tridiagonal(s, b) - b).norm() == 0.0);
}

TEST_CASE("diagonally dominant system against a dense solve") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    TridiagonalSystem s{random_vector(8, rng), random_vector(8, rng), random_vector(8, rng)};
    s.diag.array() += 6.0;
    const ComplexVector b = random_vector(8, rng);
    const ComplexVector x = solve_tridiagonal(s, b);
    const ComplexVector ref = s.dense().partialPivLu().solve(b);
    CHECK((x - ref).norm() <= 1e-13 * ref.norm());
    CHECK((s.apply(x) - b).norm() <= 1e-12 * b.norm());
  }
}

TEST_CASE("indefinite Crank-Nicolson-type matrix against a dense solve") {
  const Index n = 200;
  const Real h = 0.01, tau = 1e-4;
  TridiagonalSystem s{ComplexVector::Constant(n, 0.5 / (h * h) * 0.5),
                      ComplexVector::Constant(n, Complex(-0.5 / (h * h), 1.0 / tau)),
                      ComplexVector::Constant(n, 0.5 / (h * h) * 0.5)};
  for (Index i = 0; i < n; ++i) s.diag(i) -= 800.0 * std::sin(0.1 * i);
  std::mt19937_64 rng(9);
  const ComplexVector b = random_vector(n, rng);
  const TridiagonalFactorization f(s);
  const ComplexVector x = f.solve(b);
  const ComplexVector ref = s.dense().partialPivLu().solve(b);
  CHECK((x - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("zero pivot is reported") {
  TridiagonalSystem s{ComplexVector::Ones(3), ComplexVector::Zero(3), ComplexVector::Ones(3)};
  CHECK_THROWS_AS(solve_tridiagonal(s, ComplexVector::Ones(3)), NumericalError);
}
