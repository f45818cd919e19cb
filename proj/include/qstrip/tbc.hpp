#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "qstrip/common.hpp"
#include "qstrip/spectral.hpp"

namespace qstrip {

/// Constants of the exterior problem for one Fourier mode l:
///   i hbar rho d_t Psi = -(hbar^2/2) b1 d^_x d-_x Psi + v_mode Psi  on j >= J,
/// with v_mode = (hbar^2/2) B2_inf lambda_l + V_inf. The kernel depends on
/// nothing else.
struct ModeParameters {
  Real hbar = 1.0;
  Real rho = 1.0;
  Real b1 = 1.0;
  Real h = 0.0;
  Real tau = 0.0;
  Real v_mode = 0.0;

  auto key() const { return std::make_tuple(hbar, rho, b1, h, tau, v_mode); }
};

/// Discrete Dirichlet-to-Neumann convolution kernel R^0..R^M of one mode:
///   s_t (Psi_{J+1} - Psi_{J-1})^m = sum_{q=0}^m R^q Psi_J^{m-q}
/// for the exterior Crank-Nicolson solution with zero initial data.
struct ModeKernel {
  ModeParameters params;
  ComplexVector r;

  Index length() const { return r.size() - 1; }
};

/// Root kappa with |kappa| < 1 of kappa^2 - (2 + c(z)) kappa + 1 = 0.
Complex characteristic_root(const ModeParameters& p, Complex z);
/// Z-transform of the kernel, sum_m R^m z^{-m}, for |z| > 1.
Complex kernel_symbol(const ModeParameters& p, Complex z);

struct InverseZOptions {
  Index samples = 0;  ///< N; 0 selects 4 (M + 1)
  Real radius = 0.0;  ///< r; 0 balances aliasing r^{-N} against roundoff r^M
};

/// Kernel from the symbol sampled on |z| = r and inverted by an N-point DFT.
ModeKernel kernel_inverse_z(const ModeParameters& p, Index M, const InverseZOptions& options = {});

/// Kernel from the impulse response of the exterior scheme truncated to
/// exterior_nodes cells with a homogeneous Dirichlet far end; 0 picks a
/// length for which the far end cannot influence the first M + 1 levels.
ModeKernel kernel_impulse_oracle(const ModeParameters& p, Index M, Index exterior_nodes = 0);

/// Default truncation length used by kernel_impulse_oracle.
Index default_exterior_nodes(Index M);

/// Asymptotic constants that fix all mode kernels of one boundary.
struct KernelSetParameters {
  Real hbar = 1.0;
  Real rho = 1.0;
  Real b1 = 1.0;
  Real b2 = 1.0;
  Real v = 0.0;
  Real h = 0.0;
  Real tau = 0.0;

  ModeParameters mode(Real lambda) const {
    return {hbar, rho, b1, h, tau, 0.5 * hbar * hbar * b2 * lambda + v};
  }
};

enum class KernelMethod { inverse_z, impulse };

/// Thread-safe memo of kernels keyed by (hbar, rho, b1, h, tau, v_mode, M, method).
class KernelCache {
 public:
  ModeKernel get(const ModeParameters& p, Index M, KernelMethod method = KernelMethod::inverse_z);
  std::size_t size() const;

 private:
  using Key = std::tuple<Real, Real, Real, Real, Real, Real, Index, int>;
  mutable std::mutex mutex_;
  std::map<Key, ModeKernel> kernels_;
};

/// Column l-1 holds R_l^0..R_l^M.
struct KernelSet {
  KernelSetParameters params;
  Eigen::MatrixXcd r;
  RealVector v_mode;

  Index modes() const { return r.cols(); }
  Index length() const { return r.rows() - 1; }
  ModeKernel mode(Index l) const;
};

KernelSet build_kernel_set(const KernelSetParameters& params, const SpectralBasis& basis, Index M,
                           KernelMethod method = KernelMethod::inverse_z, KernelCache* cache = nullptr);

/// Modal boundary traces Q_l^0..Q_l^m, one column per mode, append-only.
class BoundaryHistory {
 public:
  BoundaryHistory() = default;
  BoundaryHistory(Index modes, Index capacity_levels);

  Index modes() const { return values_.cols(); }
  /// Number of stored levels including level 0.
  Index size() const { return size_; }
  /// Current (latest) level m.
  Index level() const { return size_ - 1; }
  void append(const ComplexVector& modal_values);
  const Complex& at(Index m, Index mode_index) const { return values_(m, mode_index); }
  Complex& at(Index m, Index mode_index) { return values_(m, mode_index); }

 private:
  Eigen::MatrixXcd values_;
  Index size_ = 0;
};

/// (R * Q)^m for one mode, optionally skipping the q = 0 term.
Complex convolve(const KernelSet& kernels, const BoundaryHistory& history, Index mode_index, Index m,
                 bool include_current = true);

/// S_ref^m = (1/2h) F^{-1}((R_l * (F Phi)^(l))^m) at the history's latest level,
/// returned on the y-nodes (ends zero).
ComplexVector apply_s_ref(const BoundaryHistory& history, const KernelSet& kernels, const SpectralBasis& basis);

/// Im sum_{m=1}^{M'} (S^m Phi^m, s_t Phi^m)_{omega_delta} tau for M' = 1..M.
/// phi holds Phi^0..Phi^M as y-node arrays with Phi^0 = 0 and zero ends.
RealVector positivity_partial_sums(const KernelSet& kernels, const SpectralBasis& basis,
                                   const std::vector<ComplexVector>& phi);
Real check_positivity(const KernelSet& kernels, const SpectralBasis& basis, const std::vector<ComplexVector>& phi);
/// The same sum split per mode (column l-1 = mode l, row = M'-1).
Eigen::MatrixXd positivity_per_mode(const KernelSet& kernels, const SpectralBasis& basis,
                                    const std::vector<ComplexVector>& phi);

/// Binary kernel dump: "QKRN", u32 version, u32 modes, u32 M, seven f64
/// parameters (hbar, rho, b1, b2, v, h, tau), then per mode one f64 v_mode and
/// M + 1 little-endian (re, im) f64 pairs.
void write_kernels_binary(const std::filesystem::path& path, const KernelSet& kernels);
KernelSet read_kernels_binary(const std::filesystem::path& path);
/// CSV with header mode,v_mode,m,re,im.
void write_kernels_csv(const std::filesystem::path& path, const KernelSet& kernels);

}  // namespace qstrip
