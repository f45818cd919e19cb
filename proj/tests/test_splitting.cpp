#include <random>

#include "doctest.h"
#include "qstrip/reference.hpp"
#include "qstrip/splitting_solver.hpp"

using namespace qstrip;

namespace {

Problem desk_problem(Index J, Index K, Index M, Real T, Real q = 0.0, StripKind strip = StripKind::semi_infinite) {
  Problem p;
  p.x = AxisMesh::x_axis(3.0, J);
  p.y = AxisMesh::y_axis(2.8, K);
  p.t = TimeMesh::uniform(T, M);
  p.model = PhysicalModel::homogeneous(1.0, {1.0, 1.0, 1.0, 0.0});
  p.model.v = barrier_potential({1.6, 1.7, 0.7, 2.1, q}, 3.0, 2.8);
  p.model.x0_right = 1.7;
  if (strip == StripKind::infinite) {
    p.model.x0_left = 1.6;
    p.left = BoundaryKind::transparent;
  }
  return p;
}

Field packet(const Problem& p, Real x0 = 1.0, Real k = 30.0) {
  return gaussian_packet(p.x, p.y, {k, 1.0 / 120.0, x0, 1.4}, p.strip());
}

Field random_state(const Problem& p, std::mt19937_64& rng) {
  std::normal_distribution<Real> d;
  Field f = Field::Zero(p.x.size(), p.y.size());
  for (Index j = 1; j < p.x.intervals(); ++j)
    for (Index k = 1; k < p.y.intervals(); ++k) f(j, k) = Complex(d(rng), d(rng));
  return f;
}

}  // namespace

TEST_CASE("zero data stays zero") {
  const Problem p = desk_problem(40, 8, 10, 0.005);
  SplittingSolver s(p, Field::Zero(41, 9));
  for (int m = 0; m < 10; ++m) s.step();
  CHECK(s.psi().abs().maxCoeff() == 0.0);
}

TEST_CASE("no steps returns the initial state") {
  const Problem p = desk_problem(40, 8, 0, 0.0);
  const Field psi0 = packet(p);
  const RunResult r = run(p, psi0);
  CHECK((r.psi - psi0).abs().maxCoeff() == 0.0);
  CHECK(r.mass.size() == 1);
}

TEST_CASE("interior rows reproduce the per-mode Crank-Nicolson stencil") {
  const Problem p = desk_problem(30, 8, 10, 0.005, 1500.0);
  PhysicalModel m = p.model;
  m.v_tilde = barrier_slab({1.6, 1.7, 0.7, 2.1, 1500.0});
  const SampledCoefficients c = sample_coefficients(m, p.x, p.y);
  const SpectralBasis basis(p.y);
  const Real tau = 0.0005;
  std::mt19937_64 rng(3);
  std::normal_distribution<Real> d;
  for (Index l : {1, 4, 7}) {
    const ModeSystem s = assemble_mode_system(c, basis, l, tau, BoundaryKind::dirichlet, BoundaryKind::dirichlet);
    ComplexVector u(31), v(31);
    for (Index j = 0; j <= 30; ++j) {
      u(j) = Complex(d(rng), d(rng));
      v(j) = Complex(d(rng), d(rng));
    }
    const ComplexVector lhs = s.matrix.apply(u) - s.rhs(v);
    const ComplexVector w = 0.5 * (u + v);
    const Real lambda = basis.eigenvalue(l);
    for (Index j = 1; j < 30; ++j) {
      const Complex flux_r = c.b11h(j + 1, 1) * diff_backward(w, p.x, j + 1);
      const Complex flux_l = c.b11h(j, 1) * diff_backward(w, p.x, j);
      const Complex lw = -0.5 * (flux_r - flux_l) / p.x.half_step(j) + (0.5 * lambda + c.v_tilde_h(j)) * w(j);
      const Complex expected = I * c.rho_h(j, 1) / tau * (u(j) - v(j)) - lw;
      CHECK(std::abs(lhs(j) - expected) <= 1e-10 * std::abs(expected));
    }
    CHECK(s.mode_potential(5) == doctest::Approx(0.5 * lambda + c.v_tilde_h(5)));
  }
}

TEST_CASE("kernel-free boundary row is a Neumann-type expression") {
  const Problem p = desk_problem(30, 8, 10, 0.005);
  const SampledCoefficients c = sample_coefficients(p.model, p.x, p.y);
  const SpectralBasis basis(p.y);
  KernelSet k = build_kernel_set({1.0, 1.0, 1.0, 1.0, 0.0, p.x.tail_step(), 0.0005}, basis, 10);
  k.r.setZero();
  const ModeSystem s = assemble_mode_system(c, basis, 3, 0.0005, BoundaryKind::dirichlet, BoundaryKind::transparent, &k);
  const Real h = p.x.tail_step();
  const Complex mass = 0.5 * h * I / 0.0005;
  CHECK(std::abs(s.matrix.diag(30) + s.matrix.sub(30) - (-mass + 0.25 * h * k.v_mode(2))) < 1e-10);
  CHECK(std::abs(s.rhs_diag(30) + s.rhs_sub(30) - (-mass - 0.25 * h * k.v_mode(2))) < 1e-10);
  CHECK(s.rhs_sub(30) == -s.matrix.sub(30));
}

TEST_CASE("small mode system against a dense solve") {
  const Problem p = desk_problem(4, 4, 6, 0.003);
  const SampledCoefficients c = sample_coefficients(p.model, p.x, p.y);
  const SpectralBasis basis(p.y);
  const KernelSet k = build_kernel_set({1.0, 1.0, 1.0, 1.0, 0.0, p.x.tail_step(), 0.0005}, basis, 6);
  std::mt19937_64 rng(5);
  std::normal_distribution<Real> d;
  for (Index l = 1; l <= basis.modes(); ++l) {
    const ModeSystem s =
        assemble_mode_system(c, basis, l, 0.0005, BoundaryKind::transparent, BoundaryKind::transparent, &k, &k);
    ComplexVector b(5);
    for (Index j = 0; j < 5; ++j) b(j) = Complex(d(rng), d(rng));
    const ComplexVector x = solve_tridiagonal(s.matrix, b);
    const ComplexVector ref = s.matrix.dense().fullPivLu().solve(b);
    CHECK((x - ref).norm() <= 1e-13 * ref.norm());
  }
}

TEST_CASE("stage fields keep moduli and boundary values") {
  const Problem p = desk_problem(120, 16, 20, 0.01, 1500.0);
  const Field psi0 = packet(p, 1.3);
  SplittingSolver s(p, psi0);
  Field prev = psi0;
  for (int m = 0; m < 20; ++m) {
    s.step();
    CHECK((s.psi_breve().abs() - prev.abs()).abs().maxCoeff() < 1e-14);
    CHECK((s.psi().abs() - s.psi_tilde().abs()).abs().maxCoeff() < 1e-14);
    CHECK((s.psi_breve().row(120) - prev.row(120)).abs().maxCoeff() == 0.0);
    CHECK((s.psi().row(120) - s.psi_tilde().row(120)).abs().maxCoeff() == 0.0);
    prev = s.psi();
  }
}

TEST_CASE("zero split potential makes the kicks identities") {
  Problem p = desk_problem(60, 8, 5, 0.005);
  const Field psi0 = packet(p);
  SplittingSolver s(p, psi0);
  s.step();
  CHECK((s.psi_breve() - psi0).abs().maxCoeff() == 0.0);
  CHECK((s.psi() - s.psi_tilde()).abs().maxCoeff() == 0.0);
}

TEST_CASE("free packet mass is conserved until it reaches the boundary") {
  const Problem p = desk_problem(300, 32, 150, 0.027);
  const Field psi0 = packet(p, 2.0);
  std::vector<Real> edge;
  RunOptions o;
  o.observer = [&](const SplittingSolver& s) { edge.push_back(s.psi().row(300).abs().maxCoeff()); };
  const RunResult r = run(p, psi0, o);
  const Real m0 = r.mass.front();
  bool contact = false;
  for (std::size_t m = 0; m < r.mass.size(); ++m) {
    contact = contact || edge[m] > 1e-6;
    if (!contact) CHECK(std::abs(r.mass[m] - m0) <= 1e-10 * m0);
    if (m > 0) CHECK(r.mass[m] <= r.mass[m - 1] * (1.0 + 1e-13));
  }
  CHECK(contact);
  CHECK(r.mass.back() < 0.9 * m0);
}

TEST_CASE("mirror-symmetric data on the infinite strip gives mirrored traces") {
  Problem p = desk_problem(150, 16, 120, 0.03, 0.0, StripKind::infinite);
  p.model.v = barrier_potential({1.4, 1.6, 0.7, 2.1, 800.0}, 3.0, 2.8);
  p.model.x0_left = 1.4;
  p.model.x0_right = 1.6;
  const Field a = packet(p, 1.0, -30.0);
  const Field psi0 = a + a.colwise().reverse();
  SplittingSolver s(p, psi0);
  Real worst = 0.0;
  for (int m = 0; m < 120; ++m) {
    s.step();
    worst = std::max(worst, (s.psi() - s.psi().colwise().reverse()).abs().maxCoeff());
    CHECK(std::abs(s.flux_left().back() - s.flux_right().back()) <= 1e-10 * (std::abs(s.flux_right().back()) + 1e-30));
  }
  CHECK(worst <= 1e-10);
  CHECK(s.mass_trace().back() < 0.5 * s.mass_trace().front());
}

TEST_CASE("free packet leaves through the left boundary without reflection") {
  Problem p = desk_problem(150, 16, 400, 0.2, 0.0, StripKind::infinite);
  const Field psi0 = packet(p, 1.0, -30.0);
  RunOptions o;
  o.snapshot_levels = {400};
  const RunResult r = run(p, psi0, o);
  CHECK(r.mass.back() <= 1e-4 * r.mass.front());
  ExtendedDomainOptions eo;
  eo.wave_number = 30.0;
  eo.factor = 5.0;
  const ExtendedRun ext = run_extended_domain(p, psi0, eo);
  CHECK((ext.restricted.back() - r.psi).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("runs are bitwise reproducible") {
  const Problem p = desk_problem(100, 16, 30, 0.01, 1500.0, StripKind::infinite);
  const Field psi0 = packet(p);
  const RunResult a = run(p, psi0), b = run(p, psi0);
  CHECK((a.psi - b.psi).abs().maxCoeff() == 0.0);
  CHECK(a.mass == b.mass);
}

TEST_CASE("snapshots are taken at the requested levels") {
  const Problem p = desk_problem(60, 8, 20, 0.01);
  RunOptions o;
  o.snapshot_levels = {0, 6, 20};
  o.record_right_traces = true;
  const RunResult r = run(p, packet(p), o);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[1].level == 6);
  CHECK(r.snapshots[1].time == doctest::Approx(0.003));
  CHECK((r.snapshots[2].psi - r.psi).abs().maxCoeff() == 0.0);
  CHECK(r.right_traces.size() == 21);
}

TEST_CASE("unsupported problems are rejected") {
  SUBCASE("non-uniform time mesh with a transparent boundary") {
    Problem p = desk_problem(40, 8, 2, 0.01);
    p.t = TimeMesh({0.001, 0.002});
    CHECK_THROWS_AS(SplittingSolver(p, Field::Zero(41, 9)), ValidationError);
  }
  SUBCASE("cross terms") {
    Problem p = desk_problem(40, 8, 2, 0.01);
    p.model.b12 = [](Real x, Real) { return x < 1.0 ? 0.1 : 0.0; };
    CHECK_THROWS_AS(SplittingSolver(p, Field::Zero(41, 9)), ValidationError);
  }
  SUBCASE("initial data on the lateral boundary") {
    const Problem p = desk_problem(40, 8, 2, 0.01);
    Field f = Field::Zero(41, 9);
    f(10, 0) = 1.0;
    CHECK_THROWS_AS(SplittingSolver(p, f), ValidationError);
  }
  SUBCASE("split potential on the boundary row") {
    Problem p = desk_problem(40, 8, 2, 0.01);
    p.model.x0_right = 3.0;
    p.model.v = [](Real x, Real) { return x > 2.9 ? 5.0 : 0.0; };
    CHECK_THROWS_AS(SplittingSolver(p, Field::Zero(41, 9)), ValidationError);
  }
}

TEST_CASE("random states satisfy the factorized one-step form") {
  Problem p = desk_problem(80, 16, 10, 0.01, 1500.0);
  std::mt19937_64 rng(31);
  for (auto variant : {PropagatorVariant::cayley, PropagatorVariant::exponential}) {
    p.propagator = variant;
    const Field psi0 = random_state(p, rng);
    SplittingSolver s(p, psi0);
    s.step();
    const FactorizationCheck f = check_factorized_forms(s, psi0);
    CHECK(f.deviation <= 1e-13);
    CHECK(f.stage_modulus <= 1e-13);
  }
}
