#include "qstrip/study.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qstrip {

namespace {

Index& axis_value(SolverConfig& c, Axis axis) {
  switch (axis) {
    case Axis::J: return c.J;
    case Axis::K: return c.K;
    case Axis::M: return c.M;
  }
  return c.J;
}

struct Trajectory {
  Problem problem;
  std::vector<Field> fields;  ///< one per requested level
  std::vector<Real> mass;
  double runtime = std::numeric_limits<double>::infinity();
};

Trajectory simulate(const SolverConfig& c, const std::vector<Index>& levels, Index repeats, KernelCache* cache) {
  Trajectory t;
  t.problem = build_problem(c);
  const Field psi0 = initial_field(c, t.problem);
  RunOptions opts;
  opts.snapshot_levels = levels;
  opts.solver.cache = cache;
  for (Index r = 0; r < std::max<Index>(repeats, 1); ++r) {
    RunResult res = run(t.problem, psi0, opts);
    t.runtime = std::min(t.runtime, res.counters.total_seconds);
    if (r == 0) {
      for (auto& s : res.snapshots) t.fields.push_back(std::move(s.psi));
      t.mass = std::move(res.mass);
    }
  }
  return t;
}

/// Levels 1..M_coarse spread over count points, scaled to M.
std::vector<Index> comparison_levels(Index coarse_m, Index count, Index m) {
  std::vector<Index> out;
  for (Index i = 1; i <= count; ++i) {
    const Index mc = static_cast<Index>(std::llround(static_cast<double>(i * coarse_m) / static_cast<double>(count)));
    if (mc >= 1 && (out.empty() || out.back() != mc * (m / coarse_m))) out.push_back(mc * (m / coarse_m));
  }
  return out;
}

ErrorNorms compare(const Trajectory& a, const Trajectory& ref) {
  std::vector<ErrorNorms> per;
  for (std::size_t i = 0; i < a.fields.size(); ++i)
    per.push_back(error_norms(a.fields[i], a.problem.x, a.problem.y, ref.fields[i], ref.problem.x, ref.problem.y,
                              a.problem.norm_kind()));
  return max_over_times(per);
}

Real mass_growth(const std::vector<Real>& mass) {
  Real d = 0.0;
  for (Real m : mass) d = std::max(d, m - mass.front());
  return mass.front() > 0.0 ? d / mass.front() : d;
}

std::string fmt(std::optional<Real> v) {
  if (!v) return "";
  std::ostringstream o;
  o << std::setprecision(6) << *v;
  return o.str();
}

std::string fmt(Real v) { return fmt(std::optional<Real>(v)); }

}  // namespace

Axis parse_axis(const std::string& name) {
  if (name == "J" || name == "j") return Axis::J;
  if (name == "K" || name == "k") return Axis::K;
  if (name == "M" || name == "m") return Axis::M;
  throw ValidationError("axis must be J, K or M, got '" + name + "'");
}

std::string axis_name(Axis axis) { return axis == Axis::J ? "J" : axis == Axis::K ? "K" : "M"; }

ConvergenceReport convergence_study(const SolverConfig& base, Axis axis, const std::vector<Index>& levels,
                                    const StudyOptions& options) {
  require(!levels.empty(), "convergence study needs at least one level");
  for (std::size_t i = 1; i < levels.size(); ++i)
    require(levels[i] == 2 * levels[i - 1], "convergence levels must double");
  require(options.reference_factor >= 0, "reference factor must be non-negative");

  ConvergenceReport report;
  report.axis = axis;
  report.reference_size = options.reference_factor == 0 ? levels.back() : options.reference_factor * levels.back();

  const Index coarse_m = axis == Axis::M ? levels.front() : base.M;
  auto levels_for = [&](Index m) { return comparison_levels(coarse_m, options.comparison_times, m); };

  SolverConfig ref_cfg = base;
  axis_value(ref_cfg, axis) = report.reference_size;
  require(ref_cfg.M % coarse_m == 0, "reference M must be a multiple of the coarsest M");
  const Trajectory ref = simulate(ref_cfg, levels_for(ref_cfg.M), 1, options.cache);

  for (std::size_t i = 0; i < levels.size(); ++i) {
    SolverConfig c = base;
    axis_value(c, axis) = levels[i];
    StudyRow row;
    row.J = c.J;
    row.K = c.K;
    row.M = c.M;
    const Trajectory t = simulate(c, levels_for(c.M), options.timing_repeats, options.cache);
    row.errors = compare(t, ref);
    row.runtime = t.runtime;
    if (i > 0) {
      const StudyRow& prev = report.rows.back();
      if (row.errors.c > 0.0) row.ratio_c = prev.errors.c / row.errors.c;
      if (row.errors.l2 > 0.0) row.ratio_l2 = prev.errors.l2 / row.errors.l2;
      if (prev.runtime > 0.0) row.runtime_ratio = row.runtime / prev.runtime;
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string ConvergenceReport::csv() const {
  std::ostringstream o;
  o << "J,K,M,E_C,E_L2,E_C_rel,E_L2_rel,R_C,R_L2,runtime,runtime_ratio\n";
  for (const auto& r : rows)
    o << r.J << ',' << r.K << ',' << r.M << ',' << fmt(r.errors.c) << ',' << fmt(r.errors.l2) << ','
      << fmt(r.errors.c_rel) << ',' << fmt(r.errors.l2_rel) << ',' << fmt(r.ratio_c) << ',' << fmt(r.ratio_l2) << ','
      << fmt(r.runtime) << ',' << fmt(r.runtime_ratio) << '\n';
  return o.str();
}

std::string ConvergenceReport::table() const {
  const std::vector<std::string> head{"J", "K", "M", "E_C", "E_L2", "E_C,rel", "E_L2,rel", "R_C", "R_L2",
                                      "runtime", "ratio"};
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& r : rows)
    cells.push_back({std::to_string(r.J), std::to_string(r.K), std::to_string(r.M), fmt(r.errors.c),
                     fmt(r.errors.l2), fmt(r.errors.c_rel), fmt(r.errors.l2_rel), fmt(r.ratio_c), fmt(r.ratio_l2),
                     fmt(r.runtime), fmt(r.runtime_ratio)});
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream o;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) o << (i ? "  " : "") << std::setw(int(width[i])) << row[i];
    o << '\n';
  }
  return o.str();
}

VTildeComparison vtilde_comparison(const SolverConfig& config, Index refinement, const StudyOptions& options) {
  require(refinement >= 1, "refinement must be positive");
  const Index count = options.comparison_times;
  SolverConfig zero = config;
  zero.v_tilde = VTildeChoice::zero;
  SolverConfig slab = config;
  slab.v_tilde = VTildeChoice::barrier_slab;
  SolverConfig ref = zero;
  ref.J *= refinement;
  ref.K *= refinement;
  ref.M *= refinement;

  const auto lv = comparison_levels(config.M, count, config.M);
  const Trajectory a = simulate(zero, lv, 1, options.cache);
  const Trajectory b = simulate(slab, lv, 1, options.cache);
  const Trajectory r = simulate(ref, comparison_levels(config.M, count, ref.M), 1, options.cache);

  VTildeComparison out;
  out.zero = compare(a, r);
  out.slab = compare(b, r);
  if (out.slab.c > 0.0) out.p_c = (out.zero.c / out.slab.c - 1.0) * 100.0;
  if (out.slab.l2 > 0.0) out.p_l2 = (out.zero.l2 / out.slab.l2 - 1.0) * 100.0;
  for (std::size_t i = 0; i < a.fields.size(); ++i)
    out.difference_c = std::max(out.difference_c, (a.fields[i] - b.fields[i]).abs().maxCoeff());
  out.mass_growth_zero = mass_growth(a.mass);
  out.mass_growth_slab = mass_growth(b.mass);
  return out;
}

}  // namespace qstrip
