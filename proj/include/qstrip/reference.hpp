#pragma once

#include <optional>
#include <vector>

#include "qstrip/banded_lu.hpp"
#include "qstrip/splitting_solver.hpp"

namespace qstrip {

struct CnOptions {
  /// Use V_tilde_h in place of V_h: the operator of the splitting's middle stage.
  bool use_v_tilde = false;
  SolverOptions solver;
};

/// Unsplit Crank-Nicolson scheme for the full 2D Hamiltonian, cross terms
/// included, with Dirichlet or discrete transparent x-boundaries. The 2D system
/// over the lexicographic index j (K+1) + k is factored once by banded LU.
/// Requires a uniform time mesh.
class CrankNicolsonSolver {
 public:
  CrankNicolsonSolver(const Problem& problem, const Field& psi0, const CnOptions& options = {});

  /// Psi^m from Psi^{m-1}.
  void step();
  /// Solves one level with v in place of the previous field and advances the
  /// boundary histories with the result, which also becomes the current field.
  const Field& advance(const Field& v);

  Index level() const { return level_; }
  const Field& psi() const { return psi_; }
  const std::vector<Real>& mass_trace() const { return mass_; }
  /// ||A u - b|| / ||b|| of the last solve.
  Real last_residual() const { return residual_; }
  const SampledCoefficients& coefficients() const { return coeffs_; }
  const SpectralBasis& basis() const { return basis_; }
  const KernelSet* right_kernels() const { return right_ ? &*right_ : nullptr; }
  const BandedMatrix& matrix() const { return matrix_; }

 private:
  Index index(Index j, Index k) const { return j * (coeffs_.K() + 1) + k; }
  void assemble();
  void boundary_rows(Index jb, Index jn, const KernelSet& kernels);
  void boundary_rhs(Index jb, Index jn, const KernelSet& kernels, const BoundaryHistory& hist, const Field& v,
                    ComplexVector& rhs, Index m) const;

  Problem problem_;
  CnOptions options_;
  SampledCoefficients coeffs_;
  SpectralBasis basis_;
  RealGrid potential_;
  Real tau_ = 0.0;
  std::optional<KernelSet> right_;
  std::optional<KernelSet> left_;
  BandedMatrix matrix_;
  BandedLU lu_;
  Field psi_;
  BoundaryHistory history_right_;
  BoundaryHistory history_left_;
  std::vector<Real> mass_;
  Index level_ = 0;
  Real residual_ = 0.0;
};

struct ExtendedDomainOptions {
  Real factor = 4.0;
  /// Packet wave number k for the group-velocity bound sqrt(2) k hbar B1 / rho;
  /// zero skips the check.
  Real wave_number = 0.0;
  RunOptions run;
};

/// The problem on an x-interval enlarged by uniform tail cells (and by head
/// cells when the left boundary is transparent) with Dirichlet far ends.
struct ExtendedDomain {
  Problem problem;
  Field psi0;
  Index offset = 0;
  Index original_intervals = 0;

  Field restrict(const Field& w) const { return w.middleRows(offset, original_intervals + 1); }
};

ExtendedDomain extend_domain(const Problem& problem, const Field& psi0, Real factor = 4.0);

struct ExtendedRun {
  ExtendedDomain domain;
  RunResult result;
  /// Restriction of Psi^m to the original mesh, m = 0..M.
  std::vector<Field> restricted;
};

/// Throws ValidationError when waves moving at the group-velocity bound could
/// return from the far end within the run.
ExtendedRun run_extended_domain(const Problem& problem, const Field& psi0, const ExtendedDomainOptions& options = {});

struct EnergyBalance {
  Real flux_sum = 0.0;   ///< hbar B1 Im sum_m (S_ref Psi_J, s_t Psi_J) tau
  Real tail_norm = 0.0;  ///< rho_inf times the squared exterior norm of Psi^M
  Real relative_gap = 0.0;
};

/// Evaluates both sides of the exterior energy identity on an extended run of a
/// semi-infinite problem, with kernels built for the original boundary.
EnergyBalance energy_identity(const ExtendedRun& run, const Problem& original, KernelCache* cache = nullptr);

struct FactorizationCheck {
  Real deviation = 0.0;        ///< max |lhs - rhs| / max(|lhs|, |rhs|) of the one-shot form
  Real stage_modulus = 0.0;    ///< max | |E W| - |W| | over both kicks
};

/// Residual of [i hbar rho - tau/2 (H + V~)] E^* Psi^m = [i hbar rho + tau/2 (H + V~)] E Psi^{m-1}
/// on the interior nodes, with H the general 2D mesh Hamiltonian.
FactorizationCheck check_factorized_forms(const SampledCoefficients& coeffs, const CayleyPropagator& kick,
                                          const Field& previous, const Field& next);
/// The same for the last step of a splitting solver.
FactorizationCheck check_factorized_forms(const SplittingSolver& solver, const Field& previous);

/// The Hermitian form
///   (hbar^2/2) sum_cells {B11 s_y[(d_x U)(d_x W)^*] + B12 (s_x d_y U)(d_x s_y W)^* + B21 (d_x s_y U)(s_x d_y W)^*
///                         + B22 s_x[(d_y U)(d_y W)^*]} h_j delta_k + (potential U, W)
/// on the closed x-mesh, for U, W vanishing on the Dirichlet boundary.
Complex sesquilinear_form(const SampledCoefficients& coeffs, const Field& u, const Field& w,
                          const RealGrid* potential = nullptr);

}  // namespace qstrip
