#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qstrip/splitting_solver.hpp"

namespace qstrip {

enum class VTildeChoice { zero, barrier_slab };
enum class SnapshotFormat { csv, raw, both };

/// One simulation as read from a `key = value` file with [sections].
struct SolverConfig {
  // [domain]
  Real X = 3.0;
  Real Y = 2.8;
  Real X0 = -1.0;  ///< right edge of the inhomogeneous region; negative derives it from the barrier
  StripKind strip = StripKind::infinite;
  // [mesh]
  Index J = 300;
  Index K = 32;
  Index M = 150;
  Real T = 0.027;
  // [physics]
  Real hbar = 1.0;
  Real rho = 1.0;
  Real b1 = 2.0;
  Real b2 = 2.0;
  Real v_inf = 0.0;
  Barrier barrier{1.6, 1.7, 0.7, 2.1, 1500.0};
  VTildeChoice v_tilde = VTildeChoice::zero;
  PropagatorVariant propagator = PropagatorVariant::cayley;
  // [packet]
  GaussianPacket packet{};
  // [output]
  std::vector<Index> snapshots;  ///< empty selects the default milestones
  std::filesystem::path directory = "out";
  SnapshotFormat format = SnapshotFormat::csv;
};

/// Parses configuration text; origin names the source in error messages.
SolverConfig parse_config(const std::string& text, const std::string& origin = "<config>");
SolverConfig load_config(const std::filesystem::path& path);
/// Sets one dotted key such as "mesh.J"; throws ValidationError on unknown keys or bad values.
void set_config_value(SolverConfig& config, const std::string& key, const std::string& value);
/// Keys accepted by set_config_value.
std::vector<std::string> config_keys();
std::string format_config(const SolverConfig& config);

/// Levels 180, 300, 420, 600 out of 600 scaled to M, unless listed explicitly.
std::vector<Index> snapshot_levels(const SolverConfig& config);

Problem build_problem(const SolverConfig& config);
Field initial_field(const SolverConfig& config, const Problem& problem);

}  // namespace qstrip
