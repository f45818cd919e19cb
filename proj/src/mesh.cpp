#include "qstrip/mesh.hpp"

#include <cmath>

namespace qstrip {

AxisMesh::AxisMesh(std::vector<Real> nodes, Index min_intervals) : nodes_(std::move(nodes)) {
  if (static_cast<Index>(nodes_.size()) < min_intervals + 1)
    throw ValidationError("mesh has " + std::to_string(nodes_.size() == 0 ? 0 : nodes_.size() - 1) +
                          " intervals, at least " + std::to_string(min_intervals) + " required");
  for (std::size_t j = 1; j < nodes_.size(); ++j) {
    if (!(nodes_[j] > nodes_[j - 1]) || !std::isfinite(nodes_[j]))
      throw ValidationError("mesh nodes must be finite and strictly increasing");
  }
}

AxisMesh AxisMesh::uniform(Real start, Real length, Index intervals, Index min_intervals) {
  require(intervals >= 1 && length > 0.0, "uniform mesh needs positive length and intervals");
  std::vector<Real> nodes(static_cast<std::size_t>(intervals) + 1);
  const Real h = length / static_cast<Real>(intervals);
  for (Index j = 0; j <= intervals; ++j) nodes[static_cast<std::size_t>(j)] = start + h * static_cast<Real>(j);
  nodes.back() = start + length;
  return AxisMesh(std::move(nodes), min_intervals);
}

AxisMesh AxisMesh::x_axis(Real length, Index intervals) { return uniform(0.0, length, intervals, 4); }

AxisMesh AxisMesh::x_axis(std::vector<Real> nodes) {
  require(!nodes.empty() && nodes.front() == 0.0, "x mesh must start at 0");
  return AxisMesh(std::move(nodes), 4);
}

AxisMesh AxisMesh::y_axis(Real length, Index intervals) { return uniform(0.0, length, intervals, 2); }

AxisMesh AxisMesh::y_axis(std::vector<Real> nodes) {
  require(!nodes.empty() && nodes.front() == 0.0, "y mesh must start at 0");
  return AxisMesh(std::move(nodes), 2);
}

Real AxisMesh::step(Index j) const {
  const Index n = intervals();
  if (j < 0 || j > n + 1) throw ValidationError("mesh step index out of range");
  if (j == 0) j = 1;
  if (j == n + 1) j = n;
  return nodes_[static_cast<std::size_t>(j)] - nodes_[static_cast<std::size_t>(j - 1)];
}

Real AxisMesh::midpoint(Index j) const {
  const Index n = intervals();
  if (j < 0 || j > n + 1) throw ValidationError("mesh cell index out of range");
  if (j == 0) return front() - 0.5 * step(0);
  if (j == n + 1) return back() + 0.5 * step(n + 1);
  return 0.5 * (nodes_[static_cast<std::size_t>(j - 1)] + nodes_[static_cast<std::size_t>(j)]);
}

bool AxisMesh::is_uniform(Real rel_tol) const {
  const Real h = step(1);
  for (Index j = 2; j <= intervals(); ++j)
    if (std::abs(step(j) - h) > rel_tol * h) return false;
  return true;
}

TimeMesh::TimeMesh(std::vector<Real> steps) : steps_(std::move(steps)) {
  times_.assign(steps_.size() + 1, 0.0);
  for (std::size_t m = 0; m < steps_.size(); ++m) {
    if (!(steps_[m] > 0.0) || !std::isfinite(steps_[m]))
      throw ValidationError("time steps must be positive and finite");
    times_[m + 1] = times_[m] + steps_[m];
  }
  uniform_ = true;
  for (std::size_t m = 1; m < steps_.size(); ++m)
    if (std::abs(steps_[m] - steps_[0]) > 1e-12 * steps_[0]) uniform_ = false;
}

TimeMesh TimeMesh::uniform(Real final_time, Index levels) {
  require(levels >= 0, "negative number of time levels");
  if (levels == 0) return TimeMesh{};
  require(final_time > 0.0, "final time must be positive");
  TimeMesh t(std::vector<Real>(static_cast<std::size_t>(levels), final_time / static_cast<Real>(levels)));
  for (Index m = 0; m <= levels; ++m)
    t.times_[static_cast<std::size_t>(m)] = final_time * static_cast<Real>(m) / static_cast<Real>(levels);
  return t;
}

Real TimeMesh::step(Index m) const {
  if (m < 1 || m > levels()) throw ValidationError("time level out of range");
  return steps_[static_cast<std::size_t>(m - 1)];
}

Real TimeMesh::time(Index m) const {
  if (m < 0 || m > levels()) throw ValidationError("time level out of range");
  return times_[static_cast<std::size_t>(m)];
}

RealVector node_weights(const AxisMesh& mesh, InnerProductKind kind) {
  const Index n = mesh.intervals();
  RealVector w = RealVector::Zero(n + 1);
  for (Index j = 1; j < n; ++j) w(j) = mesh.half_step(j);
  if (kind != InnerProductKind::interior) w(n) = 0.5 * mesh.step(n);
  if (kind == InnerProductKind::closed_both_ends) w(0) = 0.5 * mesh.step(1);
  return w;
}

namespace {
void check_grid(const Field& u, const AxisMesh& x, const AxisMesh& y) {
  if (u.rows() != x.size() || u.cols() != y.size()) throw ValidationError("grid shape mismatch");
}
}  // namespace

Complex inner_product_2d(const Field& u, const Field& w, const AxisMesh& x, const AxisMesh& y,
                         InnerProductKind kind) {
  check_grid(u, x, y);
  check_grid(w, x, y);
  const RealVector wx = node_weights(x, kind);
  const RealVector wy = node_weights(y, InnerProductKind::interior);
  Complex sum = 0.0;
  for (Index j = 0; j < u.rows(); ++j) {
    if (wx(j) == 0.0) continue;
    Complex row = 0.0;
    for (Index k = 1; k + 1 < u.cols(); ++k) row += u(j, k) * std::conj(w(j, k)) * wy(k);
    sum += row * wx(j);
  }
  return sum;
}

Real norm_2d(const Field& w, const AxisMesh& x, const AxisMesh& y, InnerProductKind kind) {
  return std::sqrt(std::max(0.0, inner_product_2d(w, w, x, y, kind).real()));
}

Real weighted_norm_2d(const Field& w, const RealGrid& weight, const AxisMesh& x, const AxisMesh& y,
                      InnerProductKind kind) {
  check_grid(w, x, y);
  if (weight.rows() != w.rows() || weight.cols() != w.cols()) throw ValidationError("weight shape mismatch");
  const RealVector wx = node_weights(x, kind);
  const RealVector wy = node_weights(y, InnerProductKind::interior);
  Real sum = 0.0;
  for (Index j = 0; j < w.rows(); ++j) {
    if (wx(j) == 0.0) continue;
    Real row = 0.0;
    for (Index k = 1; k + 1 < w.cols(); ++k) row += weight(j, k) * std::norm(w(j, k)) * wy(k);
    sum += row * wx(j);
  }
  return std::sqrt(sum);
}

}  // namespace qstrip
