#include <random>

#include "doctest.h"
#include "qstrip/spectral.hpp"

using namespace qstrip;

namespace {

ComplexVector random_interior(Index K, std::mt19937_64& rng) {
  std::normal_distribution<Real> d;
  ComplexVector u = ComplexVector::Zero(K + 1);
  for (Index k = 1; k < K; ++k) u(k) = Complex(d(rng), d(rng));
  return u;
}

AxisMesh stretched(Index K) {
  std::vector<Real> n;
  for (Index k = 0; k <= K; ++k) {
    const Real s = static_cast<Real>(k) / K;
    n.push_back(2.0 * (s + 0.15 * std::sin(M_PI * s)));
  }
  return AxisMesh::y_axis(n);
}

}  // namespace

TEST_CASE("single-mode basis from the explicit formulas") {
  const Real Y = 1.7;
  const SpectralBasis b(AxisMesh::y_axis(Y, 2));
  const Real d = Y / 2;
  REQUIRE(b.modes() == 1);
  CHECK(b.eigenvalue(1) == doctest::Approx(2.0 / (d * d)));
  CHECK(b.eigenvectors()(1, 0) == doctest::Approx(std::sqrt(2.0 / Y)));
}

TEST_CASE("uniform eigenvalues ascend and stay below the bound") {
  const Real Y = 2.8;
  for (Index K : {8, 32, 24}) {
    const SpectralBasis b(AxisMesh::y_axis(Y, K));
    const Real d = Y / K;
    for (Index l = 1; l < K - 1; ++l) CHECK(b.eigenvalue(l) < b.eigenvalue(l + 1));
    CHECK(b.eigenvalue(K - 1) < 4.0 / (d * d));
    CHECK(b.eigenvalue(1) > 0.0);
    CHECK(b.fast_path() == (K != 24));
  }
}

TEST_CASE("basis is orthonormal and diagonalizes the operator") {
  for (const AxisMesh& y : {AxisMesh::y_axis(2.8, 16), stretched(13)}) {
    const SpectralBasis b(y);
    const RealVector w = node_weights(y, InnerProductKind::interior);
    const Eigen::MatrixXd& e = b.eigenvectors();
    const Eigen::MatrixXd g = e.transpose() * w.asDiagonal() * e;
    CHECK((g - Eigen::MatrixXd::Identity(b.modes(), b.modes())).cwiseAbs().maxCoeff() < 1e-12);
    for (Index l = 1; l <= b.modes(); ++l) {
      const ComplexVector v = e.col(l - 1).cast<Complex>();
      const ComplexVector lv = apply_y_laplacian(y, v);
      CHECK((lv - b.eigenvalue(l) * v).norm() <= 1e-11 * b.eigenvalue(l) * v.norm());
    }
  }
}

TEST_CASE("forward of a basis vector is a unit coordinate") {
  const SpectralBasis b(AxisMesh::y_axis(2.8, 16));
  const ComplexVector c = b.forward(ComplexVector(b.eigenvectors().col(4).cast<Complex>()));
  for (Index l = 0; l < b.modes(); ++l) CHECK(std::abs(c(l) - (l == 4 ? 1.0 : 0.0)) < 1e-13);
  CHECK(b.forward(ComplexVector::Zero(17).eval()).norm() == 0.0);
  CHECK(b.inverse(ComplexVector::Zero(15).eval()).norm() == 0.0);
}

TEST_CASE("round trip, Parseval and fast-dense agreement") {
  std::mt19937_64 rng(21);
  for (Index K : {16, 64, 12}) {
    const AxisMesh y = AxisMesh::y_axis(2.8, K);
    const SpectralBasis b(y);
    for (int t = 0; t < 5; ++t) {
      const ComplexVector u = random_interior(K, rng);
      const ComplexVector c = b.forward(u);
      CHECK((b.inverse(c) - u).norm() <= 1e-12 * u.norm());
      const Real n2 = inner_product(u, u, y).real();
      CHECK(std::abs(c.squaredNorm() - n2) <= 1e-12 * n2);
      const ComplexVector dense = b.forward(u, TransformPath::dense);
      CHECK((dense - c).norm() <= 1e-12 * c.norm());
      CHECK((b.inverse(c, TransformPath::dense) - u).norm() <= 1e-12 * u.norm());
    }
  }
}

TEST_CASE("non-uniform meshes use the dense path") {
  const AxisMesh y = stretched(10);
  const SpectralBasis b(y);
  CHECK_FALSE(b.fast_path());
  std::mt19937_64 rng(2);
  const ComplexVector u = random_interior(10, rng);
  CHECK((b.inverse(b.forward(u)) - u).norm() <= 1e-12 * u.norm());
  CHECK_THROWS_AS(b.forward(u, TransformPath::fast), ValidationError);
  CHECK_THROWS_AS(b.forward(ComplexVector::Zero(5).eval()), ValidationError);
}
