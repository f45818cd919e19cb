#pragma once

#include <span>
#include <vector>

#include "qstrip/common.hpp"

namespace qstrip {

/// Non-uniform 1D mesh x_0 < x_1 < ... < x_n.
///
/// Steps h_j = x_j - x_{j-1} are defined for j = 1..n. The mesh is treated as
/// continuing uniformly past both ends, so the ghost steps h_0 := h_1 and
/// h_{n+1} := h_n are also available; this is the uniform tail the discrete
/// transparent boundary rows rely on. Immutable after construction.
class AxisMesh {
 public:
  AxisMesh() = default;
  explicit AxisMesh(std::vector<Real> nodes, Index min_intervals = 1);

  static AxisMesh uniform(Real start, Real length, Index intervals, Index min_intervals = 1);

  /// x-axis mesh on [0, length]; rejects J < 4.
  static AxisMesh x_axis(Real length, Index intervals);
  static AxisMesh x_axis(std::vector<Real> nodes);
  /// y-axis mesh on [0, length]; rejects K < 2 and pins the last node to length.
  static AxisMesh y_axis(Real length, Index intervals);
  static AxisMesh y_axis(std::vector<Real> nodes);

  Index intervals() const { return static_cast<Index>(nodes_.size()) - 1; }
  Index size() const { return static_cast<Index>(nodes_.size()); }
  Real node(Index j) const { return nodes_[static_cast<std::size_t>(j)]; }
  std::span<const Real> nodes() const { return nodes_; }
  Real front() const { return nodes_.front(); }
  Real back() const { return nodes_.back(); }
  Real length() const { return back() - front(); }

  /// h_j for j in [0, n+1], ghost steps included.
  Real step(Index j) const;
  /// h_{j+1/2} = (h_j + h_{j+1}) / 2 for j in [0, n].
  Real half_step(Index j) const { return 0.5 * (step(j) + step(j + 1)); }
  /// Cell midpoint x_{j-1/2} for j in [0, n+1], ghost cells included.
  Real midpoint(Index j) const;

  Real tail_step() const { return step(intervals()); }
  Real head_step() const { return step(1); }
  bool is_uniform(Real rel_tol = 1e-12) const;

 private:
  std::vector<Real> nodes_;
};

/// Time mesh with steps tau_m, m = 1..M.
class TimeMesh {
 public:
  TimeMesh() = default;
  explicit TimeMesh(std::vector<Real> steps);
  static TimeMesh uniform(Real final_time, Index levels);

  Index levels() const { return static_cast<Index>(steps_.size()); }
  /// tau_m for m in [1, M].
  Real step(Index m) const;
  Real time(Index m) const;
  Real final_time() const { return levels() == 0 ? 0.0 : time(levels()); }
  bool uniform() const { return uniform_; }

 private:
  std::vector<Real> steps_;
  std::vector<Real> times_;
  bool uniform_ = true;
};

enum class InnerProductKind {
  interior,          ///< sum over j = 1..n-1 with weights h_{j+1/2}
  closed,            ///< interior plus U_n W_n^* h_n / 2
  closed_both_ends,  ///< closed plus U_0 W_0^* h_1 / 2
};

namespace detail {
inline void check_index(Index j, Index lo, Index hi) {
  if (j < lo || j > hi) throw ValidationError("mesh stencil index out of range");
}
template <typename Derived>
void check_length(const Eigen::DenseBase<Derived>& w, const AxisMesh& mesh) {
  if (w.size() != mesh.size()) throw ValidationError("mesh function length mismatch");
}
}  // namespace detail

/// (W_j - W_{j-1}) / h_j
template <typename Derived>
typename Derived::Scalar diff_backward(const Eigen::DenseBase<Derived>& w, const AxisMesh& mesh,
                                       Index j) {
  detail::check_length(w, mesh);
  detail::check_index(j, 1, mesh.intervals());
  return (w(j) - w(j - 1)) / mesh.step(j);
}

/// (W_{j+1} - W_j) / h_{j+1/2}
template <typename Derived>
typename Derived::Scalar diff_forward_mod(const Eigen::DenseBase<Derived>& w, const AxisMesh& mesh,
                                          Index j) {
  detail::check_length(w, mesh);
  detail::check_index(j, 0, mesh.intervals() - 1);
  return (w(j + 1) - w(j)) / mesh.half_step(j);
}

/// (W_{j+1} - W_{j-1}) / (2 h_{j+1/2})
template <typename Derived>
typename Derived::Scalar diff_central(const Eigen::DenseBase<Derived>& w, const AxisMesh& mesh,
                                      Index j) {
  detail::check_length(w, mesh);
  detail::check_index(j, 1, mesh.intervals() - 1);
  return (w(j + 1) - w(j - 1)) / (2.0 * mesh.half_step(j));
}

/// (W_{j-1} + W_j) / 2
template <typename Derived>
typename Derived::Scalar avg_bar(const Eigen::DenseBase<Derived>& w, const AxisMesh& mesh, Index j) {
  detail::check_length(w, mesh);
  detail::check_index(j, 1, mesh.intervals());
  return 0.5 * (w(j - 1) + w(j));
}

/// (h_j W_j + h_{j+1} W_{j+1}) / (2 h_{j+1/2})
template <typename Derived>
typename Derived::Scalar avg_hat(const Eigen::DenseBase<Derived>& w, const AxisMesh& mesh, Index j) {
  detail::check_length(w, mesh);
  detail::check_index(j, 0, mesh.intervals() - 1);
  return (mesh.step(j) * w(j) + mesh.step(j + 1) * w(j + 1)) / (2.0 * mesh.half_step(j));
}

/// Mesh inner product (U, W) = sum U_j W_j^* weight_j.
template <typename DerivedU, typename DerivedW>
Complex inner_product(const Eigen::DenseBase<DerivedU>& u, const Eigen::DenseBase<DerivedW>& w,
                      const AxisMesh& mesh, InnerProductKind kind = InnerProductKind::interior) {
  detail::check_length(u, mesh);
  detail::check_length(w, mesh);
  const Index n = mesh.intervals();
  Complex sum = 0.0;
  for (Index j = 1; j < n; ++j) sum += Complex(u(j)) * std::conj(Complex(w(j))) * mesh.half_step(j);
  if (kind != InnerProductKind::interior)
    sum += Complex(u(n)) * std::conj(Complex(w(n))) * (0.5 * mesh.step(n));
  if (kind == InnerProductKind::closed_both_ends)
    sum += Complex(u(0)) * std::conj(Complex(w(0))) * (0.5 * mesh.step(1));
  return sum;
}

template <typename Derived>
Real norm(const Eigen::DenseBase<Derived>& w, const AxisMesh& mesh,
          InnerProductKind kind = InnerProductKind::interior) {
  return std::sqrt(std::max(0.0, qstrip::inner_product(w, w, mesh, kind).real()));
}

/// Quadrature weights matching inner_product, one per node (zero where unused).
RealVector node_weights(const AxisMesh& mesh, InnerProductKind kind);

/// 2D inner product: tensor product of the x weights (given kind) with the
/// interior y weights delta_{k+1/2}.
Complex inner_product_2d(const Field& u, const Field& w, const AxisMesh& x, const AxisMesh& y,
                         InnerProductKind kind = InnerProductKind::closed);
Real norm_2d(const Field& w, const AxisMesh& x, const AxisMesh& y,
             InnerProductKind kind = InnerProductKind::closed);
/// Weighted norm || sqrt(weight) W ||.
Real weighted_norm_2d(const Field& w, const RealGrid& weight, const AxisMesh& x, const AxisMesh& y,
                      InnerProductKind kind = InnerProductKind::closed);

}  // namespace qstrip
