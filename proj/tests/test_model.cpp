#include <random>

#include "doctest.h"
#include "qstrip/model.hpp"

using namespace qstrip;

namespace {

PhysicalModel constant_model(Real v) {
  PhysicalModel m = PhysicalModel::homogeneous(1.3, {2.0, 0.7, 1.4, v});
  m.x0_right = 1.0;
  return m;
}

Field random_interior(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<Real> d;
  Field f = Field::Zero(rows, cols);
  for (Index j = 1; j + 1 < rows; ++j)
    for (Index k = 1; k + 1 < cols; ++k) f(j, k) = Complex(d(rng), d(rng));
  return f;
}

Complex interior_inner(const Field& u, const Field& w, const AxisMesh& x, const AxisMesh& y) {
  return inner_product_2d(u, w, x, y, InnerProductKind::interior);
}

}  // namespace

TEST_CASE("constant coefficients sample to the same constants") {
  const AxisMesh x = AxisMesh::x_axis(2.0, 10), y = AxisMesh::y_axis(1.0, 6);
  const SampledCoefficients c = sample_coefficients(constant_model(5.0), x, y);
  CHECK((c.rho_h == 2.0).all());
  CHECK((c.b11h == 0.7).all());
  CHECK((c.b22h == 1.4).all());
  CHECK((c.v_h == 5.0).all());
  CHECK((c.delta_v_h == 0.0).all());
  CHECK_FALSE(c.has_cross_terms);
}

TEST_CASE("rho_h at a node of a non-uniform mesh") {
  const AxisMesh x({0.0, 0.5, 1.5, 2.0, 3.0}), y = AxisMesh::y_axis(1.0, 2);
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.rho = [](Real xx, Real) { return xx + 1.0; };
  m.x0_right = 1e9;
  const SampledCoefficients c = sample_coefficients(m, x, y);
  // Midpoints 0.25 and 1.0 weighted by the steps 0.5 and 1.0.
  CHECK(c.rho_h(1, 1) == doctest::Approx((0.5 * 1.25 + 1.0 * 2.0) / 1.5));
}

TEST_CASE("coefficients reach their asymptotic values near the boundary") {
  const AxisMesh x = AxisMesh::x_axis(3.0, 60), y = AxisMesh::y_axis(2.8, 16);
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.v = barrier_potential({1.6, 1.7, 0.7, 2.1, 1500.0}, 3.0, 2.8);
  m.x0_right = 1.7;
  const SampledCoefficients c = sample_coefficients(m, x, y);
  for (Index j = 58; j <= 60; ++j) {
    CHECK((c.v_h.row(j) == 0.0).all());
    CHECK((c.delta_v_h.row(j) == 0.0).all());
  }
  CHECK(c.v_h.maxCoeff() == doctest::Approx(1500.0));
}

TEST_CASE("asymptotic violations are rejected") {
  const AxisMesh x = AxisMesh::x_axis(3.0, 30), y = AxisMesh::y_axis(2.8, 8);
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.v = barrier_potential({1.6, 1.7, 0.7, 2.1, 1500.0}, 3.0, 2.8);
  m.x0_right = 1.0;
  CHECK_THROWS_AS(sample_coefficients(m, x, y), ValidationError);
  CHECK_THROWS_AS(barrier_potential({1.6, 3.5, 0.0, 1.0, 1.0}, 3.0, 2.8), ValidationError);
}

TEST_CASE("Cayley propagator for a hand-checked value") {
  const AxisMesh x = AxisMesh::x_axis(1.0, 4), y = AxisMesh::y_axis(1.0, 2);
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.v = [](Real, Real) { return 2.0; };
  m.x0_right = 1e9;
  const SampledCoefficients c = sample_coefficients(m, x, y);
  const CayleyPropagator e = build_propagator(c, 0.1);
  const Complex expected = Complex(1.0, -0.05) / Complex(1.0, 0.05);
  CHECK(std::abs(e.values(2, 1) - expected) < 1e-15);
  CHECK(std::abs(std::abs(e.values(2, 1)) - 1.0) < 1e-15);
}

TEST_CASE("both propagators are unimodular and unit where the split potential vanishes") {
  const AxisMesh x = AxisMesh::x_axis(3.0, 60), y = AxisMesh::y_axis(2.8, 16);
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.v = barrier_potential({1.6, 1.7, 0.7, 2.1, 1500.0}, 3.0, 2.8);
  m.x0_right = 1.7;
  const SampledCoefficients c = sample_coefficients(m, x, y);
  for (auto variant : {PropagatorVariant::cayley, PropagatorVariant::exponential}) {
    const CayleyPropagator e = build_propagator(c, 1e-3, variant);
    CHECK((e.values.abs() - 1.0).abs().maxCoeff() < 1e-15);
    for (Index j = 0; j <= 60; ++j)
      for (Index k = 0; k <= 16; ++k)
        if (c.delta_v_h(j, k) == 0.0) CHECK(e.values(j, k) == Complex(1.0));
  }
}

TEST_CASE("Cayley and exponential propagators differ at third order") {
  const AxisMesh x = AxisMesh::x_axis(1.0, 4), y = AxisMesh::y_axis(1.0, 2);
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.v = [](Real, Real) { return 40.0; };
  m.x0_right = 1e9;
  const SampledCoefficients c = sample_coefficients(m, x, y);
  Real previous = 0.0;
  for (Real tau : {0.02, 0.01, 0.005, 0.0025}) {
    const Complex a = build_propagator(c, tau).values(2, 1);
    const Complex b = build_propagator(c, tau, PropagatorVariant::exponential).values(2, 1);
    const Real d = std::abs(a - b);
    if (previous > 0.0) CHECK(previous / d == doctest::Approx(8.0).epsilon(0.05));
    previous = d;
  }
}

TEST_CASE("Gaussian packet values and symmetry") {
  const AxisMesh x = AxisMesh::x_axis(2.0, 40), y = AxisMesh::y_axis(2.8, 28);
  const GaussianPacket g{30.0, 1.0 / 120.0, 1.0, 1.4};
  const Field psi = gaussian_packet(x, y, g);
  CHECK(std::abs(psi(20, 14) - Complex(1.0)) < 1e-15);
  for (Index d = 1; d < 15; ++d) CHECK(std::abs(psi(20 + d, 14)) == doctest::Approx(std::abs(psi(20 - d, 14))));
  CHECK((psi.col(0) == Complex(0.0)).all());
  CHECK((psi.col(28) == Complex(0.0)).all());
  CHECK((psi.row(0) == Complex(0.0)).all());
  CHECK((psi.row(39) == Complex(0.0)).all());
  CHECK((psi.row(40) == Complex(0.0)).all());
  const Field inf = gaussian_packet(x, y, g, StripKind::infinite);
  CHECK((inf.row(1) == Complex(0.0)).all());
}

TEST_CASE("Hamiltonian of zero is zero") {
  const AxisMesh x = AxisMesh::x_axis(1.0, 8), y = AxisMesh::y_axis(1.0, 6);
  const SampledCoefficients c = sample_coefficients(constant_model(0.0), x, y);
  CHECK((apply_hamiltonian(c, Field::Zero(9, 7)) == Complex(0.0)).all());
}

TEST_CASE("separable sine modes are eigenfunctions of the constant-coefficient Hamiltonian") {
  const Index J = 12, K = 10;
  const Real X = 1.5, Y = 1.1;
  const AxisMesh x = AxisMesh::x_axis(X, J), y = AxisMesh::y_axis(Y, K);
  const SampledCoefficients c = sample_coefficients(constant_model(0.0), x, y);
  const Real h = X / J, d = Y / K;
  const int p = 3, q = 2;
  Field w(J + 1, K + 1);
  for (Index j = 0; j <= J; ++j)
    for (Index k = 0; k <= K; ++k) w(j, k) = std::sin(M_PI * p * j / J) * std::sin(M_PI * q * k / K);
  const Real lx = std::pow(2.0 / h * std::sin(M_PI * p * h / (2.0 * X)), 2);
  const Real ly = std::pow(2.0 / d * std::sin(M_PI * q * d / (2.0 * Y)), 2);
  const Real lambda = 0.5 * 1.3 * 1.3 * (0.7 * lx + 1.4 * ly);
  const Field hw = apply_hamiltonian(c, w);
  for (Index j = 1; j < J; ++j)
    for (Index k = 1; k < K; ++k) CHECK(std::abs(hw(j, k) - lambda * w(j, k)) < 1e-10 * lambda);
}

TEST_CASE("Hamiltonian is self-adjoint with variable coefficients and cross terms") {
  const AxisMesh x({0.0, 0.2, 0.5, 0.7, 1.0, 1.4, 1.6, 1.9}), y({0.0, 0.3, 0.5, 0.9, 1.2, 1.5});
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.rho = [](Real a, Real b) { return 1.0 + 0.3 * a * b; };
  m.b11 = [](Real a, Real b) { return 2.0 + std::sin(a + b); };
  m.b22 = [](Real a, Real b) { return 1.5 + std::cos(2.0 * a - b); };
  m.b12 = [](Real a, Real b) { return 0.3 * std::sin(a * b); };
  m.x0_right = 1e9;
  const SampledCoefficients c = sample_coefficients(m, x, y);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 5; ++t) {
    const Field u = random_interior(8, 6, rng), w = random_interior(8, 6, rng);
    const Complex a = interior_inner(apply_hamiltonian(c, u), w, x, y);
    const Complex b = std::conj(interior_inner(apply_hamiltonian(c, w), u, x, y));
    CHECK(std::abs(a - b) <= 1e-13 * std::abs(a));
    const Complex self = interior_inner(apply_hamiltonian(c, w), w, x, y);
    CHECK(std::abs(self.imag()) <= 1e-13 * std::abs(self));
  }
}
