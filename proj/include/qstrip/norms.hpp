#pragma once

#include <optional>
#include <vector>

#include "qstrip/common.hpp"
#include "qstrip/mesh.hpp"

namespace qstrip {

/// Mesh errors on the joint nodes. Relative variants are absent when the
/// reference norm vanishes.
struct ErrorNorms {
  Real c = 0.0;
  Real l2 = 0.0;
  std::optional<Real> c_rel;
  std::optional<Real> l2_rel;
};

/// Index in fine of every node of coarse; throws ValidationError when some
/// coarse node is not a fine node.
std::vector<Index> joint_nodes(const AxisMesh& coarse, const AxisMesh& fine);

/// Errors of psi on (x, y) against ref on the nested mesh (xr, yr). The L2 norm
/// is the 2D mesh norm of the given kind on the coarse mesh.
ErrorNorms error_norms(const Field& psi, const AxisMesh& x, const AxisMesh& y, const Field& ref, const AxisMesh& xr,
                       const AxisMesh& yr, InnerProductKind kind = InnerProductKind::closed);

/// Componentwise maximum over time levels; a relative entry is kept only when
/// it is present at every level.
ErrorNorms max_over_times(const std::vector<ErrorNorms>& levels);

}  // namespace qstrip
