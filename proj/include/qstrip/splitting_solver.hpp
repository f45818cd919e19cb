#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qstrip/common.hpp"
#include "qstrip/mesh.hpp"
#include "qstrip/model.hpp"
#include "qstrip/spectral.hpp"
#include "qstrip/tbc.hpp"
#include "qstrip/tridiagonal.hpp"

namespace qstrip {

enum class BoundaryKind { dirichlet, transparent };

/// Everything that defines one simulation apart from the initial data.
struct Problem {
  AxisMesh x;
  AxisMesh y;
  TimeMesh t;
  PhysicalModel model;
  BoundaryKind left = BoundaryKind::dirichlet;
  BoundaryKind right = BoundaryKind::transparent;
  PropagatorVariant propagator = PropagatorVariant::cayley;
  TransformPath transform = TransformPath::automatic;
  KernelMethod kernel_method = KernelMethod::inverse_z;

  StripKind strip() const {
    return left == BoundaryKind::transparent ? StripKind::infinite : StripKind::semi_infinite;
  }
  InnerProductKind norm_kind() const {
    return left == BoundaryKind::transparent ? InnerProductKind::closed_both_ends : InnerProductKind::closed;
  }
};

/// Per-mode three-point problem A u = B v + f F + g_right H_right + g_left H_left
/// over the rows j = 0..J, where v is the transformed intermediate field, F the
/// transformed forcing and H the known history parts of the boundary convolutions.
/// Dirichlet rows are identity rows with a zero right-hand side.
struct ModeSystem {
  Index mode = 0;
  TridiagonalSystem matrix;
  ComplexVector rhs_sub;
  ComplexVector rhs_diag;
  ComplexVector rhs_sup;
  ComplexVector forcing_scale;
  Complex right_history_scale = 0.0;
  Complex left_history_scale = 0.0;
  RealVector mode_potential;

  ComplexVector rhs(const ComplexVector& v, const ComplexVector* forcing = nullptr, Complex right_history = 0.0,
                    Complex left_history = 0.0) const;
};

/// V_l,j = (hbar^2/2) B22h_j lambda_l + V_tilde_h,j for the mode l (1-based).
RealVector mode_potential(const SampledCoefficients& coeffs, const SpectralBasis& basis, Index l);

/// Rows of the mode-l problem for time step tau. Kernel sets are required for
/// transparent boundaries and supply R_l^0 and the boundary mode potential.
ModeSystem assemble_mode_system(const SampledCoefficients& coeffs, const SpectralBasis& basis, Index l, Real tau,
                                BoundaryKind left, BoundaryKind right, const KernelSet* right_kernels = nullptr,
                                const KernelSet* left_kernels = nullptr);

struct RuntimeCounters {
  Index steps = 0;
  double total_seconds = 0.0;
  double transform_seconds = 0.0;
  double solve_seconds = 0.0;
  double convolution_seconds = 0.0;
  double kernel_seconds = 0.0;
};

struct SolverOptions {
  KernelCache* cache = nullptr;
  /// Precomputed kernels; built on demand when absent.
  const KernelSet* right_kernels = nullptr;
  const KernelSet* left_kernels = nullptr;
};

/// Strang splitting in potential with per-mode tridiagonal solves.
///
/// Requires B12 = 0 and rho, B11, B22 independent of y. Transparent boundaries
/// require a uniform time mesh and Delta V = 0 on the boundary rows. Not
/// shareable between threads while stepping.
class SplittingSolver {
 public:
  SplittingSolver(const Problem& problem, const Field& psi0, const SolverOptions& options = {});

  /// Advances one level. forcing, when given, is F^m on the nodes and must
  /// vanish on the Dirichlet boundary.
  void step(const Field* forcing = nullptr);

  Index level() const { return level_; }
  Real time() const { return level_ == 0 ? 0.0 : problem_.t.time(level_); }
  const Field& psi() const { return psi_; }
  /// Stage fields of the last step: E Psi^{m-1} and the Crank-Nicolson result.
  const Field& psi_breve() const { return breve_; }
  const Field& psi_tilde() const { return tilde_; }

  /// ||sqrt(rho_h) Psi^m|| in the closed norm, m = 0..level.
  const std::vector<Real>& mass_trace() const { return mass_; }
  /// hbar B1 tau Im (S^m Psi_J^m, s_t Psi_J^m) per level (entry 0 is zero).
  const std::vector<Real>& flux_right() const { return flux_right_; }
  const std::vector<Real>& flux_left() const { return flux_left_; }
  const BoundaryHistory& history_right() const { return history_right_; }
  const BoundaryHistory& history_left() const { return history_left_; }

  const Problem& problem() const { return problem_; }
  const SampledCoefficients& coefficients() const { return coeffs_; }
  const SpectralBasis& basis() const { return basis_; }
  const CayleyPropagator& propagator() const { return propagator_; }
  const KernelSet* right_kernels() const { return right_ ? &*right_ : nullptr; }
  const KernelSet* left_kernels() const { return left_ ? &*left_ : nullptr; }
  const RuntimeCounters& counters() const { return counters_; }
  Real weighted_mass(const Field& w) const;

 private:
  void validate(const Field& psi0) const;
  void prepare(Real tau);
  using ModeMatrix = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void forward_rows(const Field& in, ModeMatrix& out) const;
  Real boundary_flux(const KernelSet& kernels, const BoundaryHistory& hist, const ComplexVector& history_part,
                     Index m) const;

  Problem problem_;
  SampledCoefficients coeffs_;
  SpectralBasis basis_;
  CayleyPropagator propagator_;
  std::optional<KernelSet> right_;
  std::optional<KernelSet> left_;
  Real tau_ = 0.0;

  // Batched factorization and right-hand-side operator, rows j = 0..J, columns = modes.
  ModeMatrix lu_sub_, lu_inv_pivot_, lu_sup_;
  ModeMatrix b_sub_, b_diag_, b_sup_, f_scale_;
  Complex right_scale_ = 0.0;
  Complex left_scale_ = 0.0;

  Field psi_;
  Field breve_;
  Field tilde_;
  ModeMatrix v_modal_, f_modal_, rhs_, u_modal_;
  ComplexVector right_part_, left_part_;
  BoundaryHistory history_right_;
  BoundaryHistory history_left_;
  std::vector<Real> mass_;
  std::vector<Real> flux_right_;
  std::vector<Real> flux_left_;
  Index level_ = 0;
  RuntimeCounters counters_;
};

struct Snapshot {
  Index level = 0;
  Real time = 0.0;
  Field psi;
};

struct RunResult {
  Field psi;
  std::vector<Snapshot> snapshots;
  std::vector<Real> mass;
  std::vector<Real> flux_right;
  std::vector<Real> flux_left;
  /// Right boundary traces Psi_J^m on the y-nodes, m = 0..M, when requested.
  std::vector<ComplexVector> right_traces;
  RuntimeCounters counters;
};

struct RunOptions {
  std::vector<Index> snapshot_levels;
  bool record_right_traces = false;
  SolverOptions solver;
  std::function<void(const SplittingSolver&)> observer;
};

/// Marches m = 1..M. M = 0 returns the initial state.
RunResult run(const Problem& problem, const Field& psi0, const RunOptions& options = {});
/// The same problem with transparent boundaries at both x-ends.
RunResult run_infinite_strip(Problem problem, const Field& psi0, const RunOptions& options = {});

}  // namespace qstrip
