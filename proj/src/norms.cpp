#include "qstrip/norms.hpp"

#include <algorithm>
#include <cmath>

namespace qstrip {

std::vector<Index> joint_nodes(const AxisMesh& coarse, const AxisMesh& fine) {
  const Real tol = 1e-10 * std::max(std::abs(fine.length()), 1.0);
  std::vector<Index> map;
  map.reserve(static_cast<std::size_t>(coarse.size()));
  Index f = 0;
  for (Index j = 0; j < coarse.size(); ++j) {
    const Real xc = coarse.node(j);
    while (f < fine.size() && fine.node(f) < xc - tol) ++f;
    if (f == fine.size() || std::abs(fine.node(f) - xc) > tol)
      throw ValidationError("meshes not nested: coarse node " + std::to_string(j) + " is not a node of the fine mesh");
    map.push_back(f);
  }
  return map;
}

ErrorNorms error_norms(const Field& psi, const AxisMesh& x, const AxisMesh& y, const Field& ref, const AxisMesh& xr,
                       const AxisMesh& yr, InnerProductKind kind) {
  require(psi.rows() == x.size() && psi.cols() == y.size(), "field does not match its mesh");
  require(ref.rows() == xr.size() && ref.cols() == yr.size(), "reference field does not match its mesh");
  const auto jx = joint_nodes(x, xr);
  const auto ky = joint_nodes(y, yr);
  Field r(psi.rows(), psi.cols());
  for (Index j = 0; j < psi.rows(); ++j)
    for (Index k = 0; k < psi.cols(); ++k) r(j, k) = ref(jx[static_cast<std::size_t>(j)], ky[static_cast<std::size_t>(k)]);
  const Field d = psi - r;
  ErrorNorms out;
  out.c = d.abs().maxCoeff();
  out.l2 = norm_2d(d, x, y, kind);
  const Real rc = r.abs().maxCoeff();
  const Real rl2 = norm_2d(r, x, y, kind);
  if (rc > 0.0) out.c_rel = out.c / rc;
  if (rl2 > 0.0) out.l2_rel = out.l2 / rl2;
  return out;
}

ErrorNorms max_over_times(const std::vector<ErrorNorms>& levels) {
  ErrorNorms out;
  bool c_rel = true, l2_rel = true;
  Real c_max = 0.0, l2_max = 0.0;
  for (const auto& e : levels) {
    out.c = std::max(out.c, e.c);
    out.l2 = std::max(out.l2, e.l2);
    if (e.c_rel) c_max = std::max(c_max, *e.c_rel);
    else c_rel = false;
    if (e.l2_rel) l2_max = std::max(l2_max, *e.l2_rel);
    else l2_rel = false;
  }
  if (!levels.empty() && c_rel) out.c_rel = c_max;
  if (!levels.empty() && l2_rel) out.l2_rel = l2_max;
  return out;
}

}  // namespace qstrip
