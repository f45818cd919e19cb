#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "qstrip/config.hpp"
#include "qstrip/norms.hpp"
#include "qstrip/snapshot_io.hpp"
#include "qstrip/study.hpp"

using namespace qstrip;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qstrip_harness_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

SolverConfig small_config() {
  SolverConfig c;
  c.J = 60;
  c.K = 8;
  c.M = 20;
  c.T = 0.01;
  return c;
}

}  // namespace

TEST_CASE("config text is parsed by section") {
  const SolverConfig c = parse_config(R"(
# comment
[domain]
X = 4.0   ; trailing comment
strip = semi_infinite
[mesh]
J = 120
[physics]
barrier_q = 1000
v_tilde = barrier_slab
propagator = exponential
[output]
snapshots = 3, 7
format = both
)");
  CHECK(c.X == 4.0);
  CHECK(c.strip == StripKind::semi_infinite);
  CHECK(c.J == 120);
  CHECK(c.K == 32);
  CHECK(c.barrier.q == 1000.0);
  CHECK(c.v_tilde == VTildeChoice::barrier_slab);
  CHECK(c.propagator == PropagatorVariant::exponential);
  CHECK(c.snapshots == std::vector<Index>{3, 7});
  CHECK(c.format == SnapshotFormat::both);
}

TEST_CASE("unknown keys and bad values name the offending line") {
  try {
    parse_config("[mesh]\nJ = 10\nQ = 3\n", "test.cfg");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("test.cfg:3") != std::string::npos);
    CHECK(msg.find("Q = 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[mesh]\nJ = ten\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[domain]\nstrip = round\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[mesh\n"), ValidationError);
  CHECK_THROWS_AS(load_config(scratch("absent.cfg")), ValidationError);
}

TEST_CASE("formatted config parses back to the same values") {
  SolverConfig c;
  c.J = 77;
  c.packet.alpha = 1.0 / 120.0;
  c.snapshots = {1, 5};
  c.v_tilde = VTildeChoice::barrier_slab;
  const SolverConfig r = parse_config(format_config(c));
  CHECK(r.J == 77);
  CHECK(r.packet.alpha == c.packet.alpha);
  CHECK(r.snapshots == c.snapshots);
  CHECK(r.v_tilde == c.v_tilde);
  CHECK(format_config(r) == format_config(c));
  for (const auto& key : config_keys()) CHECK(key.find('.') != std::string::npos);
}

TEST_CASE("default snapshot schedule scales the milestones") {
  SolverConfig c;
  c.M = 600;
  CHECK(snapshot_levels(c) == std::vector<Index>{180, 300, 420, 600});
  c.M = 150;
  CHECK(snapshot_levels(c) == std::vector<Index>{45, 75, 105, 150});
  c.snapshots = {200};
  CHECK_THROWS_AS(snapshot_levels(c), ValidationError);
}

TEST_CASE("problem construction checks the barrier and the boundary region") {
  SolverConfig c;
  const Problem p = build_problem(c);
  CHECK(p.left == BoundaryKind::transparent);
  CHECK(p.model.x0_right == doctest::Approx(1.7));
  CHECK(p.model.x0_left == doctest::Approx(1.6));
  CHECK(p.model.v(1.65, 1.4) == 1500.0);
  CHECK(p.model.v(1.65, 0.5) == 0.0);
  c.X0 = 2.995;
  CHECK_THROWS_AS(build_problem(c), ValidationError);
  c.X0 = -1.0;
  c.barrier.b = 3.5;
  CHECK_THROWS_AS(build_problem(c), ValidationError);
  SolverConfig s;
  s.strip = StripKind::semi_infinite;
  s.v_tilde = VTildeChoice::barrier_slab;
  const Problem q = build_problem(s);
  CHECK(q.left == BoundaryKind::dirichlet);
  CHECK(q.model.v_tilde(1.65) == 1500.0);
}

TEST_CASE("error norms on identical and degenerate fields") {
  const AxisMesh x = AxisMesh::x_axis(1.0, 4), y = AxisMesh::y_axis(1.0, 4);
  const AxisMesh xf = AxisMesh::x_axis(1.0, 8), yf = AxisMesh::y_axis(1.0, 16);
  std::mt19937_64 rng(1);
  std::normal_distribution<Real> d;
  Field fine(9, 17);
  for (Index j = 0; j < 9; ++j)
    for (Index k = 0; k < 17; ++k) fine(j, k) = Complex(d(rng), d(rng));
  Field coarse(5, 5);
  for (Index j = 0; j < 5; ++j)
    for (Index k = 0; k < 5; ++k) coarse(j, k) = fine(2 * j, 4 * k);
  const ErrorNorms same = error_norms(coarse, x, y, fine, xf, yf);
  CHECK(same.c == 0.0);
  CHECK(same.l2 == 0.0);
  CHECK(*same.c_rel == 0.0);

  const ErrorNorms zero_ref = error_norms(coarse, x, y, Field::Zero(9, 17), xf, yf);
  CHECK(zero_ref.c == coarse.abs().maxCoeff());
  CHECK(zero_ref.l2 == doctest::Approx(norm_2d(coarse, x, y)));
  CHECK_FALSE(zero_ref.c_rel.has_value());
  CHECK_FALSE(zero_ref.l2_rel.has_value());

  CHECK_THROWS_AS(error_norms(coarse, x, y, Field::Zero(8, 17), AxisMesh::x_axis(1.0, 7), yf), ValidationError);
  const ErrorNorms worst = max_over_times({same, zero_ref});
  CHECK(worst.c == zero_ref.c);
  CHECK_FALSE(worst.c_rel.has_value());
}

TEST_CASE("raw snapshots round trip bit-exactly") {
  std::mt19937_64 rng(3);
  std::normal_distribution<Real> d;
  Field psi(7, 5);
  for (Index j = 0; j < 7; ++j)
    for (Index k = 0; k < 5; ++k) psi(j, k) = Complex(d(rng), d(rng));
  const auto path = scratch("psi.qstr");
  write_snapshot_raw(path, psi, {6, 4, 10, 3});
  const RawSnapshot r = read_snapshot_raw(path);
  CHECK(r.meta.J == 6);
  CHECK(r.meta.m == 3);
  CHECK((r.psi - psi).abs().maxCoeff() == 0.0);

  write_snapshot_raw(path, Field::Zero(7, 5), {6, 4, 10, 0});
  CHECK(std::filesystem::file_size(path) == 16 * 7 * 5 + snapshot_header_bytes);
  CHECK(read_snapshot_raw(path).psi.abs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(write_snapshot_raw(path, psi, {5, 4, 10, 0}), ValidationError);
}

TEST_CASE("csv snapshots have one row per node") {
  const AxisMesh x = AxisMesh::x_axis(1.0, 6), y = AxisMesh::y_axis(1.0, 4);
  const auto path = scratch("psi.csv");
  write_snapshot_csv(path, Field::Constant(7, 5, Complex(1.0, -2.0)), x, y);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,re,im,abs");
  Index rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 7 * 5 + 1);
}

TEST_CASE("convergence report on a small study") {
  SolverConfig c = small_config();
  c.strip = StripKind::semi_infinite;
  StudyOptions o;
  o.reference_factor = 2;
  o.comparison_times = 4;
  const ConvergenceReport r = convergence_study(c, Axis::M, {10, 20, 40}, o);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.reference_size == 80);
  CHECK_FALSE(r.rows[0].ratio_c.has_value());
  CHECK(r.rows[1].ratio_c.has_value());
  CHECK(r.rows[2].errors.c < r.rows[0].errors.c);
  const std::string csv = r.csv();
  CHECK(csv.rfind("J,K,M,E_C", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(r.table().find("R_C") != std::string::npos);
  CHECK_THROWS_AS(convergence_study(c, Axis::J, {60, 100}, o), ValidationError);
  CHECK(parse_axis("K") == Axis::K);
  CHECK_THROWS_AS(parse_axis("T"), ValidationError);
}

TEST_CASE("auxiliary potential comparison") {
  SolverConfig c = small_config();
  c.barrier.q = 0.0;
  StudyOptions o;
  o.comparison_times = 4;
  const VTildeComparison z = vtilde_comparison(c, 2, o);
  CHECK(z.difference_c == 0.0);
  CHECK(*z.p_c == 0.0);

  c.barrier.q = 1500.0;
  const VTildeComparison b = vtilde_comparison(c, 2, o);
  CHECK(b.difference_c > 0.0);
  CHECK(b.p_c.has_value());
  CHECK(b.mass_growth_zero <= 1e-12);
  CHECK(b.mass_growth_slab <= 1e-12);
}

TEST_CASE("barrier of height 1500 splits the packet into comparable parts") {
  SolverConfig c;
  c.J = 300;
  c.K = 32;
  c.M = 150;
  const Problem p = build_problem(c);
  RunOptions o;
  o.snapshot_levels = {75};
  const RunResult r = run(p, initial_field(c, p), o);
  const Field& psi = r.snapshots.front().psi;
  Real left = 0.0, right = 0.0;
  for (Index j = 0; j <= c.J; ++j) (p.x.node(j) < c.barrier.b ? left : right) += psi.row(j).abs2().sum();
  const Real share = right / (left + right);
  CHECK(share > 0.3);
  CHECK(share < 0.7);
}
