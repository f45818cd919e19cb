#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qstrip/config.hpp"
#include "qstrip/study.hpp"

namespace qstrip {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::string format_check(const CheckResult& result);

/// Free packet (barrier height zero): the mass trace stays constant until the
/// packet reaches a transparent boundary row and never rises above its start.
CheckResult verify_conservation(const SolverConfig& config);

/// TBC run against the Dirichlet run on an x-interval enlarged by factor,
/// restricted to the original mesh; E_C over all levels.
CheckResult verify_tbc_exactness(const SolverConfig& config, Real factor = 4.0, Real tolerance = 1e-8);

/// Inverse-Z kernels against the impulse-response oracle for every mode.
CheckResult verify_kernels(const SolverConfig& config, Index levels = 64, Real tolerance = 1e-10);

/// Im sum (S Phi, s_t Phi) tau >= -tolerance for random boundary histories.
CheckResult verify_positivity(const SolverConfig& config, Index trials = 200, Index levels = 32,
                              std::uint64_t seed = 1, Real tolerance = 1e-10);

/// Boundary-flux sum against the exterior tail norm of an enlarged run.
CheckResult verify_energy_identity(const SolverConfig& config, Real factor = 4.0, Real tolerance = 1e-8);

/// Three-stage step against the one-shot form on random states, both propagators.
CheckResult verify_factorization(const SolverConfig& config, Index trials = 10, std::uint64_t seed = 2,
                                 Real tolerance = 1e-13);

/// max_m ||sqrt(rho) Psi^m|| <= ||sqrt(rho) Psi^0|| + (2/hbar) sum_m ||F^m / sqrt(rho)|| tau for random Psi^0, F.
CheckResult verify_stability(const SolverConfig& config, Index trials = 100, std::uint64_t seed = 3);

struct AxisLevels {
  Axis axis = Axis::J;
  std::vector<Index> levels;
};

/// Error ratios per doubling within [low, high] on every row but the last.
CheckResult verify_convergence(const SolverConfig& config, const AxisLevels& study, Real low = 3.0, Real high = 5.0,
                               const StudyOptions& options = {});

/// Splitting-vs-unsplit-CN difference ratio per halving of tau within [low, high].
CheckResult verify_splitting_order(const SolverConfig& config, const std::vector<Index>& time_levels, Real low = 3.0,
                                   Real high = 5.0);

/// Best-of-repeats marching time ratio, runs interleaved, per doubling of J, K and M within [low, high].
CheckResult verify_runtime_scaling(const SolverConfig& config, Index repeats = 5, Real low = 1.6, Real high = 2.6);

/// Conservation, positivity, TBC exactness and factorization equivalence on one configuration.
std::vector<CheckResult> property_suite(const SolverConfig& config);

}  // namespace qstrip
