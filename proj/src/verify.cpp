#include "qstrip/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "qstrip/reference.hpp"

namespace qstrip {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(Real v) {
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

template <typename F>
CheckResult timed(const std::string& name, F&& body) {
  const auto t0 = Clock::now();
  CheckResult r = body();
  r.name = name;
  r.seconds = seconds_since(t0);
  return r;
}

/// Complex normal entries, zero on the outer rows and columns.
Field random_state(Index rows, Index cols, std::mt19937_64& rng, Real scale = 1.0) {
  std::normal_distribution<Real> n(0.0, scale);
  Field f = Field::Zero(rows, cols);
  for (Index j = 1; j + 1 < rows; ++j)
    for (Index k = 1; k + 1 < cols; ++k) f(j, k) = Complex(n(rng), n(rng));
  return f;
}

KernelSetParameters kernel_parameters(const SolverConfig& c) {
  return {c.hbar, c.rho, c.b1, c.b2, c.v_inf, c.X / static_cast<Real>(c.J), c.T / static_cast<Real>(c.M)};
}

std::vector<Field> trajectory(const Problem& p, const Field& psi0, RunResult* result = nullptr) {
  std::vector<Field> out;
  RunOptions opts;
  opts.observer = [&out](const SplittingSolver& s) { out.push_back(s.psi()); };
  RunResult r = run(p, psi0, opts);
  if (result) *result = std::move(r);
  return out;
}

std::string join(const std::vector<Real>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + sci(v[i]);
  return s;
}

}  // namespace

std::string format_check(const CheckResult& r) {
  std::ostringstream o;
  o << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " (" << std::fixed << std::setprecision(2)
    << r.seconds << " s)";
  return o.str();
}

CheckResult verify_conservation(const SolverConfig& config) {
  return timed("conservation", [&] {
    SolverConfig c = config;
    c.barrier.q = 0.0;
    const Problem p = build_problem(c);
    const Field psi0 = initial_field(c, p);
    const Index J = p.x.intervals();
    const Real amp0 = psi0.abs().maxCoeff();
    std::vector<Real> edge;
    RunOptions opts;
    opts.observer = [&](const SplittingSolver& s) {
      Real a = s.psi().row(J).abs().maxCoeff();
      if (p.left == BoundaryKind::transparent) a = std::max(a, s.psi().row(0).abs().maxCoeff());
      edge.push_back(a);
    };
    const RunResult r = run(p, psi0, opts);
    const Real m0 = r.mass.front();
    Index contact = static_cast<Index>(r.mass.size());
    for (std::size_t m = 0; m < edge.size(); ++m)
      if (edge[m] > 1e-6 * amp0) {
        contact = static_cast<Index>(m);
        break;
      }
    Real before = 0.0, rise = 0.0;
    for (Index m = 0; m < static_cast<Index>(r.mass.size()); ++m) {
      const Real rel = (r.mass[static_cast<std::size_t>(m)] - m0) / m0;
      if (m < contact) before = std::max(before, std::abs(rel));
      rise = std::max(rise, rel);
    }
    Real flux = 0.0;
    for (Real f : r.flux_right) flux += f;
    for (Real f : r.flux_left) flux += f;
    const Real balance = std::abs(r.mass.back() * r.mass.back() + flux - m0 * m0) / (m0 * m0);
    CheckResult out;
    out.passed = before <= 1e-10 && rise <= 1e-12 && balance <= 1e-10;
    out.detail = "drift before contact (m<" + std::to_string(contact) + ") " + sci(before) + ", max rise " + sci(rise) +
                 ", mass/flux balance " + sci(balance) + ", final mass ratio " + sci(r.mass.back() / m0);
    return out;
  });
}

CheckResult verify_tbc_exactness(const SolverConfig& config, Real factor, Real tolerance) {
  return timed("tbc_exactness", [&] {
    const Problem p = build_problem(config);
    const Field psi0 = initial_field(config, p);
    const std::vector<Field> tbc = trajectory(p, psi0);
    ExtendedDomainOptions opts;
    opts.factor = factor;
    opts.wave_number = config.packet.k;
    const ExtendedRun ext = run_extended_domain(p, psi0, opts);
    Real ec = 0.0;
    for (std::size_t m = 0; m < tbc.size(); ++m) ec = std::max(ec, (tbc[m] - ext.restricted[m]).abs().maxCoeff());
    CheckResult out;
    out.passed = ec <= tolerance;
    out.detail = "E_C " + sci(ec) + " over " + std::to_string(tbc.size()) + " levels (factor " + sci(factor) +
                 ", limit " + sci(tolerance) + ")";
    return out;
  });
}

CheckResult verify_kernels(const SolverConfig& config, Index levels, Real tolerance) {
  return timed("kernel_cross_validation", [&] {
    const SpectralBasis basis(AxisMesh::y_axis(config.Y, config.K));
    const KernelSetParameters kp = kernel_parameters(config);
    const KernelSet z = build_kernel_set(kp, basis, levels, KernelMethod::inverse_z);
    const KernelSet o = build_kernel_set(kp, basis, levels, KernelMethod::impulse);
    const Real diff = (z.r - o.r).cwiseAbs().maxCoeff();
    CheckResult out;
    out.passed = diff <= tolerance;
    out.detail = "max |R_inverse_z - R_impulse| " + sci(diff) + " over " + std::to_string(basis.modes()) +
                 " modes, M = " + std::to_string(levels);
    return out;
  });
}

CheckResult verify_positivity(const SolverConfig& config, Index trials, Index levels, std::uint64_t seed,
                              Real tolerance) {
  return timed("positivity", [&] {
    const SpectralBasis basis(AxisMesh::y_axis(config.Y, config.K));
    const KernelSet kernels = build_kernel_set(kernel_parameters(config), basis, levels);
    std::mt19937_64 rng(seed);
    std::normal_distribution<Real> n(0.0, 1.0);
    Real worst = std::numeric_limits<Real>::infinity();
    Index failures = 0;
    for (Index t = 0; t < trials; ++t) {
      std::vector<ComplexVector> phi(static_cast<std::size_t>(levels + 1), ComplexVector::Zero(config.K + 1));
      for (Index m = 1; m <= levels; ++m)
        for (Index k = 1; k < config.K; ++k) phi[static_cast<std::size_t>(m)](k) = Complex(n(rng), n(rng));
      const Real low = positivity_partial_sums(kernels, basis, phi).minCoeff();
      worst = std::min(worst, low);
      if (low < -tolerance) ++failures;
    }
    CheckResult out;
    out.passed = failures == 0;
    out.detail = std::to_string(trials - failures) + "/" + std::to_string(trials) +
                 " histories non-negative, smallest partial sum " + sci(worst);
    return out;
  });
}

CheckResult verify_energy_identity(const SolverConfig& config, Real factor, Real tolerance) {
  return timed("energy_identity", [&] {
    SolverConfig c = config;
    c.strip = StripKind::semi_infinite;
    const Problem p = build_problem(c);
    const Field psi0 = initial_field(c, p);
    ExtendedDomainOptions opts;
    opts.factor = factor;
    opts.wave_number = c.packet.k;
    const ExtendedRun ext = run_extended_domain(p, psi0, opts);
    const EnergyBalance e = energy_identity(ext, p);
    CheckResult out;
    out.passed = e.relative_gap <= tolerance && e.tail_norm > 0.0;
    out.detail = "flux sum " + sci(e.flux_sum) + ", tail norm " + sci(e.tail_norm) + ", relative gap " +
                 sci(e.relative_gap);
    return out;
  });
}

CheckResult verify_factorization(const SolverConfig& config, Index trials, std::uint64_t seed, Real tolerance) {
  return timed("factorization_equivalence", [&] {
    Problem p = build_problem(config);
    std::mt19937_64 rng(seed);
    KernelCache cache;
    SolverOptions so;
    so.cache = &cache;
    Real worst = 0.0, modulus = 0.0;
    for (Index t = 0; t < trials; ++t) {
      p.propagator = t % 2 == 0 ? PropagatorVariant::cayley : PropagatorVariant::exponential;
      const Field psi0 = random_state(p.x.size(), p.y.size(), rng);
      SplittingSolver s(p, psi0, so);
      s.step();
      const FactorizationCheck f = check_factorized_forms(s, psi0);
      worst = std::max(worst, f.deviation);
      modulus = std::max(modulus, f.stage_modulus);
    }
    CheckResult out;
    out.passed = worst <= tolerance && modulus <= 1e-12;
    out.detail = "max relative deviation " + sci(worst) + " over " + std::to_string(trials) +
                 " random states (Cayley and exponential), kick modulus error " + sci(modulus);
    return out;
  });
}

CheckResult verify_stability(const SolverConfig& config, Index trials, std::uint64_t seed) {
  return timed("stability_under_forcing", [&] {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> u(0.0, 1.0);
    KernelCache cache;
    SolverOptions so;
    so.cache = &cache;
    Index held = 0;
    Real tightest = std::numeric_limits<Real>::infinity();
    for (Index t = 0; t < trials; ++t) {
      SolverConfig c = config;
      c.v_tilde = t % 2 == 0 ? VTildeChoice::zero : VTildeChoice::barrier_slab;
      c.propagator = t % 4 < 2 ? PropagatorVariant::cayley : PropagatorVariant::exponential;
      const Problem p = build_problem(c);
      const Index J = p.x.intervals();
      const Field psi0 = random_state(J + 1, p.y.size(), rng, u(rng));
      SplittingSolver s(p, psi0, so);
      const RealGrid root_rho = s.coefficients().rho_h.sqrt();
      const InnerProductKind kind = p.norm_kind();
      const Real scale = std::pow(10.0, 4.0 * u(rng) - 2.0);
      Real peak = s.mass_trace().front();
      Real budget = 0.0;
      for (Index m = 1; m <= p.t.levels(); ++m) {
        Field f = random_state(J + 1, p.y.size(), rng, scale);
        // The transparent rows take forcing too; Dirichlet rows stay zero.
        std::normal_distribution<Real> n(0.0, scale);
        for (Index k = 1; k < p.y.intervals(); ++k) {
          if (p.right == BoundaryKind::transparent) f(J, k) = Complex(n(rng), n(rng));
          if (p.left == BoundaryKind::transparent) f(0, k) = Complex(n(rng), n(rng));
        }
        budget += norm_2d(f / root_rho.cast<Complex>(), p.x, p.y, kind) * p.t.step(m);
        s.step(&f);
        peak = std::max(peak, s.mass_trace().back());
      }
      const Real bound = s.mass_trace().front() + 2.0 / p.model.hbar * budget;
      tightest = std::min(tightest, bound / peak);
      if (peak <= bound * (1.0 + 1e-12)) ++held;
    }
    CheckResult out;
    out.passed = held == trials;
    out.detail = std::to_string(held) + "/" + std::to_string(trials) + " trials within the bound, smallest bound/peak " +
                 sci(tightest);
    return out;
  });
}

CheckResult verify_convergence(const SolverConfig& config, const AxisLevels& study, Real low, Real high,
                               const StudyOptions& options) {
  return timed("convergence_" + axis_name(study.axis), [&] {
    const ConvergenceReport report = convergence_study(config, study.axis, study.levels, options);
    std::vector<Real> rc, rl;
    bool ok = report.rows.size() >= 3;
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
      const StudyRow& r = report.rows[i];
      rc.push_back(r.ratio_c.value_or(0.0));
      rl.push_back(r.ratio_l2.value_or(0.0));
      if (i + 1 == report.rows.size()) continue;
      for (Real v : {rc.back(), rl.back()}) ok = ok && v >= low && v <= high;
    }
    CheckResult out;
    out.passed = ok;
    out.detail = axis_name(study.axis) + " in {" + [&] {
      std::string s;
      for (std::size_t i = 0; i < study.levels.size(); ++i) s += (i ? "," : "") + std::to_string(study.levels[i]);
      return s;
    }() + "}, reference " + std::to_string(report.reference_size) + ": R_C " + join(rc) + "; R_L2 " + join(rl) +
                 "; finest E_C " + sci(report.rows.back().errors.c);
    return out;
  });
}

CheckResult verify_splitting_order(const SolverConfig& config, const std::vector<Index>& time_levels, Real low,
                                   Real high) {
  return timed("splitting_order", [&] {
    std::vector<Real> diffs;
    KernelCache cache;
    for (Index M : time_levels) {
      SolverConfig c = config;
      c.M = M;
      const Problem p = build_problem(c);
      const Field psi0 = initial_field(c, p);
      SolverOptions so;
      so.cache = &cache;
      SplittingSolver s(p, psi0, so);
      CnOptions co;
      co.solver.cache = &cache;
      CrankNicolsonSolver cn(p, psi0, co);
      Real d = 0.0;
      for (Index m = 1; m <= M; ++m) {
        s.step();
        cn.step();
        d = std::max(d, (s.psi() - cn.psi()).abs().maxCoeff());
      }
      diffs.push_back(d);
    }
    std::vector<Real> ratios;
    bool ok = diffs.size() >= 2;
    for (std::size_t i = 1; i < diffs.size(); ++i) {
      ratios.push_back(diffs[i - 1] / diffs[i]);
      ok = ok && ratios.back() >= low && ratios.back() <= high;
    }
    CheckResult out;
    out.passed = ok;
    out.detail = "max |Psi_split - Psi_CN| " + join(diffs) + "; ratios " + join(ratios);
    return out;
  });
}

CheckResult verify_runtime_scaling(const SolverConfig& config, Index repeats, Real low, Real high) {
  return timed("runtime_scaling", [&] {
    KernelCache cache;
    std::vector<SolverConfig> configs{config, config, config, config};
    configs[1].J *= 2;
    configs[2].K *= 2;
    configs[3].M *= 2;
    std::vector<Problem> problems;
    std::vector<Field> starts;
    for (const SolverConfig& c : configs) {
      problems.push_back(build_problem(c));
      starts.push_back(initial_field(c, problems.back()));
    }
    RunOptions opts;
    opts.solver.cache = &cache;
    std::vector<double> best(configs.size(), std::numeric_limits<double>::infinity());
    for (Index r = 0; r < std::max<Index>(repeats, 1); ++r)
      for (std::size_t i = 0; i < configs.size(); ++i)
        best[i] = std::min(best[i], run(problems[i], starts[i], opts).counters.total_seconds);
    const double base = best[0];
    std::vector<Real> ratios;
    bool ok = true;
    for (std::size_t i = 1; i < configs.size(); ++i) {
      ratios.push_back(best[i] / base);
      ok = ok && ratios.back() >= low && ratios.back() <= high;
    }
    const Real unit = (static_cast<Real>(config.J) * std::log2(static_cast<Real>(config.K)) +
                       0.5 * static_cast<Real>(config.M)) *
                      static_cast<Real>(config.K) * static_cast<Real>(config.M);
    CheckResult out;
    out.passed = ok;
    out.detail = "base marching " + sci(base) + " s (" + sci(base / unit * 1e9) +
                 " ns per (J log2 K + m) K unit); ratios J,K,M " + join(ratios);
    return out;
  });
}

std::vector<CheckResult> property_suite(const SolverConfig& config) {
  return {verify_conservation(config), verify_positivity(config), verify_tbc_exactness(config),
          verify_factorization(config)};
}

}  // namespace qstrip
