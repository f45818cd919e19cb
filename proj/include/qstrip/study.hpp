#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qstrip/config.hpp"
#include "qstrip/norms.hpp"

namespace qstrip {

enum class Axis { J, K, M };

Axis parse_axis(const std::string& name);
std::string axis_name(Axis axis);

struct StudyRow {
  Index J = 0;
  Index K = 0;
  Index M = 0;
  ErrorNorms errors;
  std::optional<Real> ratio_c;
  std::optional<Real> ratio_l2;
  double runtime = 0.0;
  std::optional<double> runtime_ratio;
};

struct ConvergenceReport {
  Axis axis = Axis::J;
  Index reference_size = 0;
  std::vector<StudyRow> rows;

  std::string csv() const;
  std::string table() const;
};

struct StudyOptions {
  /// The pseudo-exact run uses reference_factor times the finest level on the
  /// study axis; 0 uses the finest level itself.
  Index reference_factor = 4;
  Index comparison_times = 10;
  Index timing_repeats = 1;
  KernelCache* cache = nullptr;
};

/// Runs the splitting solver at each level of one axis (other sizes from base)
/// and compares against a pseudo-exact run at common time levels.
ConvergenceReport convergence_study(const SolverConfig& base, Axis axis, const std::vector<Index>& levels,
                                    const StudyOptions& options = {});

struct VTildeComparison {
  ErrorNorms zero;   ///< V_tilde = 0 against the reference
  ErrorNorms slab;   ///< V_tilde = barrier slab against the reference
  std::optional<Real> p_c;
  std::optional<Real> p_l2;
  Real difference_c = 0.0;  ///< max over levels of max |Psi_zero - Psi_slab|
  /// Largest relative rise of the mass trace above its initial value.
  Real mass_growth_zero = 0.0;
  Real mass_growth_slab = 0.0;
};

/// Both auxiliary-potential choices at the configured mesh against a V_tilde = 0
/// run refined by refinement in J, K and M.
VTildeComparison vtilde_comparison(const SolverConfig& config, Index refinement = 2, const StudyOptions& options = {});

}  // namespace qstrip
