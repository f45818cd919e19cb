#pragma once

#include <memory>
#include <span>

#include "qstrip/common.hpp"
#include "qstrip/mesh.hpp"

namespace qstrip {

enum class TransformPath { automatic, fast, dense };

/// Eigenpairs of -d^_y d-_y on the interior y-nodes with U_0 = U_K = 0,
/// orthonormal in (U, W) = sum_{k=1}^{K-1} U_k W_k^* delta_{k+1/2}.
///
/// On a uniform mesh the pairs are the discrete sines and the transforms can
/// use a type-I sine FFT (taken when K is a power of two); otherwise the
/// symmetrized tridiagonal problem is solved densely. Immutable once built and
/// safe to share between threads.
class SpectralBasis {
 public:
  explicit SpectralBasis(const AxisMesh& y);
  ~SpectralBasis();
  SpectralBasis(const SpectralBasis&) = delete;
  SpectralBasis& operator=(const SpectralBasis&) = delete;
  SpectralBasis(SpectralBasis&&) noexcept;
  SpectralBasis& operator=(SpectralBasis&&) noexcept;

  /// Number of modes, K - 1.
  Index modes() const { return eigenvalues_.size(); }
  const AxisMesh& mesh() const { return mesh_; }
  /// lambda_l for l = 1..K-1 stored at index l-1, ascending.
  const RealVector& eigenvalues() const { return eigenvalues_; }
  Real eigenvalue(Index l) const { return eigenvalues_(l - 1); }
  /// Column l-1 holds E_l on the nodes k = 0..K (zero at both ends).
  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
  bool fast_path() const { return fast_; }

  /// Coefficients U^(l) = (U, E_l), written to out[l-1]. u has K+1 entries.
  void forward(std::span<const Complex> u, std::span<Complex> out,
               TransformPath path = TransformPath::automatic) const;
  /// U_k = sum_l coeff[l-1] E_l(y_k), written to u[0..K] (ends set to zero).
  void inverse(std::span<const Complex> coeff, std::span<Complex> u,
               TransformPath path = TransformPath::automatic) const;

  ComplexVector forward(const ComplexVector& u, TransformPath path = TransformPath::automatic) const;
  ComplexVector inverse(const ComplexVector& coeff, TransformPath path = TransformPath::automatic) const;

 private:
  bool use_fast(TransformPath path) const;
  void sine_transform(const Complex* in, Complex* out, Real scale) const;

  AxisMesh mesh_;
  RealVector eigenvalues_;
  Eigen::MatrixXd vectors_;
  RealVector weights_;
  bool uniform_ = false;
  bool fast_ = false;
  struct FftPlan;
  std::unique_ptr<FftPlan> plan_;
};

/// The discrete operator -d^_y d-_y applied on interior nodes (ends zero); used
/// to check that the basis diagonalizes it.
ComplexVector apply_y_laplacian(const AxisMesh& y, const ComplexVector& u);

}  // namespace qstrip
