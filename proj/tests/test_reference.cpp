#include <random>

#include "doctest.h"
#include "qstrip/reference.hpp"

using namespace qstrip;

namespace {

Problem strip_problem(Index J, Index K, Index M, Real T, const Barrier& bar, Real x0_right,
                      StripKind strip = StripKind::semi_infinite) {
  Problem p;
  p.x = AxisMesh::x_axis(3.0, J);
  p.y = AxisMesh::y_axis(2.8, K);
  p.t = TimeMesh::uniform(T, M);
  p.model = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  p.model.v = barrier_potential(bar, 3.0, 2.8);
  p.model.x0_right = x0_right;
  if (strip == StripKind::infinite) {
    p.model.x0_left = bar.a;
    p.left = BoundaryKind::transparent;
  }
  return p;
}

Field packet(const Problem& p, Real x0 = 1.0) {
  return gaussian_packet(p.x, p.y, {30.0, 1.0 / 120.0, x0, 1.4}, p.strip());
}

Field random_field(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<Real> d;
  Field f = Field::Zero(rows, cols);
  for (Index j = 1; j + 1 < rows; ++j)
    for (Index k = 1; k + 1 < cols; ++k) f(j, k) = Complex(d(rng), d(rng));
  return f;
}

Real max_difference(const Problem& p, const Field& psi0, Index M) {
  SplittingSolver s(p, psi0);
  CrankNicolsonSolver cn(p, psi0);
  Real d = 0.0;
  for (Index m = 0; m < M; ++m) {
    s.step();
    cn.step();
    d = std::max(d, (s.psi() - cn.psi()).abs().maxCoeff());
    CHECK(cn.last_residual() <= 1e-11);
  }
  return d;
}

}  // namespace

TEST_CASE("banded LU against a dense solve") {
  std::mt19937_64 rng(2);
  std::normal_distribution<Real> d;
  const Index n = 40, lo = 5, up = 3;
  BandedMatrix a(n, lo, up);
  Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - lo); j <= std::min(n - 1, i + up); ++j) {
      const Complex v = Complex(d(rng), d(rng)) + (i == j ? Complex(12.0, 3.0) : Complex(0.0));
      a(i, j) = v;
      dense(i, j) = v;
    }
  ComplexVector b(n);
  for (Index i = 0; i < n; ++i) b(i) = Complex(d(rng), d(rng));
  const ComplexVector x = BandedLU(a).solve(b);
  CHECK((x - dense.partialPivLu().solve(b)).norm() <= 1e-13 * x.norm());
  CHECK((a.apply(x) - b).norm() <= 1e-13 * b.norm());
  CHECK_THROWS_AS(a(0, 10), ValidationError);
  CHECK(std::as_const(a)(0, 10) == Complex(0.0));
}

TEST_CASE("banded LU reports a zero pivot") {
  BandedMatrix a(3, 1, 1);
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 1.0;
  a(2, 2) = 1.0;
  CHECK_THROWS_AS(BandedLU{a}, NumericalError);
}

TEST_CASE("free packet: Crank-Nicolson and splitting coincide") {
  const Problem p = strip_problem(100, 16, 40, 0.01, {1.6, 1.7, 0.7, 2.1, 0.0}, 1.7);
  CHECK(max_difference(p, packet(p, 2.0), 40) <= 1e-12);
}

TEST_CASE("y-independent potential absorbed by the auxiliary potential matches the mode decomposition") {
  const Barrier bar{1.6, 1.7, 0.0, 2.8, 1500.0};
  Problem p = strip_problem(100, 16, 30, 0.01, bar, 1.7, StripKind::infinite);
  p.model.v_tilde = barrier_slab(bar);
  CHECK(max_difference(p, packet(p), 30) <= 1e-12);
}

TEST_CASE("splitting error shrinks at second order in tau") {
  const Barrier bar{1.6, 1.7, 0.0, 2.8, 1500.0};
  std::vector<Real> diffs;
  for (Index M : {40, 80, 160}) {
    const Problem p = strip_problem(100, 16, M, 0.02, bar, 2.5);
    diffs.push_back(max_difference(p, packet(p), M));
  }
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    CHECK(diffs[i - 1] / diffs[i] >= 3.0);
    CHECK(diffs[i - 1] / diffs[i] <= 5.0);
  }
}

TEST_CASE("extended domain conserves mass and reproduces the transparent run") {
  const Problem p = strip_problem(200, 16, 100, 0.027, {1.6, 1.7, 0.7, 2.1, 0.0}, 1.7);
  const Field psi0 = packet(p, 2.0);
  ExtendedDomainOptions o;
  o.wave_number = 30.0;
  const ExtendedRun ext = run_extended_domain(p, psi0, o);
  const auto& mass = ext.result.mass;
  for (Real m : mass) CHECK(std::abs(m - mass.front()) <= 1e-11 * mass.front());
  const RunResult r = run(p, psi0);
  CHECK((ext.restricted.back() - r.psi).abs().maxCoeff() <= 1e-8);
  CHECK(ext.domain.problem.x.back() == doctest::Approx(12.0));

  const EnergyBalance e = energy_identity(ext, p);
  CHECK(e.relative_gap <= 1e-8);
}

TEST_CASE("too small an extension is rejected") {
  const Problem p = strip_problem(60, 8, 20, 0.1, {1.6, 1.7, 0.7, 2.1, 0.0}, 1.7);
  ExtendedDomainOptions o;
  o.wave_number = 30.0;
  o.factor = 1.5;
  CHECK_THROWS_AS(run_extended_domain(p, packet(p), o), ValidationError);
}

TEST_CASE("factorized form with zero split potential is plain Crank-Nicolson") {
  const Problem p = strip_problem(60, 8, 5, 0.01, {1.6, 1.7, 0.7, 2.1, 0.0}, 1.7);
  std::mt19937_64 rng(4);
  const Field psi0 = random_field(61, 9, rng);
  SplittingSolver s(p, psi0);
  s.step();
  CHECK(check_factorized_forms(s, psi0).deviation <= 1e-14);
}

TEST_CASE("sesquilinear form is Hermitian and represents the Hamiltonian") {
  const AxisMesh x({0.0, 0.3, 0.5, 0.9, 1.2, 1.6, 1.9, 2.1}), y({0.0, 0.2, 0.6, 0.9, 1.3, 1.5});
  PhysicalModel m = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  m.rho = [](Real a, Real) { return 1.0 + 0.2 * a; };
  m.b11 = [](Real a, Real b) { return 2.0 + std::sin(a * b); };
  m.b22 = [](Real a, Real b) { return 1.2 + 0.5 * std::cos(a + b); };
  m.b12 = [](Real a, Real b) { return 0.4 * std::sin(a - b); };
  m.v = [](Real a, Real b) { return 30.0 * a * b; };
  m.x0_right = 1e9;
  const SampledCoefficients c = sample_coefficients(m, x, y);
  REQUIRE(c.has_cross_terms);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const Field u = random_field(8, 6, rng), w = random_field(8, 6, rng);
    const Complex ww = sesquilinear_form(c, w, w);
    CHECK(std::abs(ww.imag()) <= 1e-12 * w.abs2().sum());
    const Complex uw = sesquilinear_form(c, u, w), wu = sesquilinear_form(c, w, u);
    CHECK(std::abs(uw - std::conj(wu)) <= 1e-12 * std::abs(uw));
    const Field hu = apply_hamiltonian(c, u) + c.v_h.cast<Complex>() * u;
    const Complex lhs = inner_product_2d(hu, w, x, y, InnerProductKind::interior);
    CHECK(std::abs(lhs - uw) <= 1e-12 * std::abs(uw));
  }
}

TEST_CASE("Crank-Nicolson rejects what it cannot represent") {
  Problem p = strip_problem(40, 8, 4, 0.01, {1.6, 1.7, 0.7, 2.1, 0.0}, 1.7);
  Field f = Field::Zero(41, 9);
  f(40, 3) = 1.0;
  CHECK_THROWS_AS(CrankNicolsonSolver(p, f), ValidationError);
  p.t = TimeMesh({0.001, 0.002});
  CHECK_THROWS_AS(CrankNicolsonSolver(p, Field::Zero(41, 9)), ValidationError);
}
