#include "qstrip/spectral.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include "fftw_lock.hpp"

namespace qstrip {

namespace {
using detail::fftw_planner_mutex;

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

struct SpectralBasis::FftPlan {
  fftw_plan plan = nullptr;
  ~FftPlan() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

SpectralBasis::SpectralBasis(const AxisMesh& y) : mesh_(y) {
  const Index K = y.intervals();
  require(K >= 2, "spectral basis needs K >= 2");
  const Index n = K - 1;
  weights_ = node_weights(y, InnerProductKind::interior);
  vectors_ = Eigen::MatrixXd::Zero(K + 1, n);
  eigenvalues_.resize(n);
  uniform_ = y.is_uniform();

  if (uniform_) {
    const Real Y = y.length();
    const Real delta = Y / static_cast<Real>(K);
    const Real amp = std::sqrt(2.0 / Y);
    for (Index l = 1; l <= n; ++l) {
      const Real s = 2.0 / delta * std::sin(std::numbers::pi * delta * static_cast<Real>(l) / (2.0 * Y));
      eigenvalues_(l - 1) = s * s;
      for (Index k = 1; k < K; ++k)
        vectors_(k, l - 1) =
            amp * std::sin(std::numbers::pi * static_cast<Real>(l) * static_cast<Real>(k) / static_cast<Real>(K));
    }
    fast_ = is_power_of_two(K);
    if (!fast_)
      std::cerr << "qstrip: K = " << K << " is not a power of two, using the dense y-transform\n";
  } else {
    // W^{1/2} A W^{-1/2} is symmetric for the weighted operator A.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (Index k = 1; k < K; ++k) {
      const Real w = weights_(k);
      S(k - 1, k - 1) = (1.0 / y.step(k + 1) + 1.0 / y.step(k)) / w;
      if (k + 1 < K) {
        const Real off = -1.0 / (y.step(k + 1) * std::sqrt(w * weights_(k + 1)));
        S(k - 1, k) = off;
        S(k, k - 1) = off;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw NumericalError("y eigenproblem failed to converge");
    eigenvalues_ = es.eigenvalues();
    for (Index l = 0; l < n; ++l) {
      Real sign = es.eigenvectors()(0, l) < 0.0 ? -1.0 : 1.0;
      for (Index k = 1; k < K; ++k) vectors_(k, l) = sign * es.eigenvectors()(k - 1, l) / std::sqrt(weights_(k));
    }
    fast_ = false;
  }

  if (fast_) {
    plan_ = std::make_unique<FftPlan>();
    std::vector<Real> scratch_in(static_cast<std::size_t>(2 * n)), scratch_out(scratch_in.size());
    int size = static_cast<int>(n);
    fftw_r2r_kind kind = FFTW_RODFT00;
    std::lock_guard lock(fftw_planner_mutex());
    // Real and imaginary parts are two interleaved transforms of stride 2.
    // Out-of-place: every later execute must be out-of-place as well.
    plan_->plan = fftw_plan_many_r2r(1, &size, 2, scratch_in.data(), nullptr, 2, 1, scratch_out.data(), nullptr, 2,
                                     1, &kind, FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    if (!plan_->plan) throw NumericalError("failed to create sine-transform plan");
  }
}

SpectralBasis::~SpectralBasis() = default;
SpectralBasis::SpectralBasis(SpectralBasis&&) noexcept = default;
SpectralBasis& SpectralBasis::operator=(SpectralBasis&&) noexcept = default;

bool SpectralBasis::use_fast(TransformPath path) const {
  if (path == TransformPath::dense) return false;
  if (path == TransformPath::fast && !fast_) throw ValidationError("fast sine transform not available for this mesh");
  return fast_;
}

void SpectralBasis::sine_transform(const Complex* in, Complex* out, Real scale) const {
  const Index n = modes();
  // RODFT00 computes 2 sum_{k=0}^{n-1} x_k sin(pi (k+1)(l+1) / (n+1)).
  fftw_execute_r2r(plan_->plan, const_cast<Real*>(reinterpret_cast<const Real*>(in)), reinterpret_cast<Real*>(out));
  for (Index l = 0; l < n; ++l) out[l] *= scale;
}

void SpectralBasis::forward(std::span<const Complex> u, std::span<Complex> out, TransformPath path) const {
  const Index K = mesh_.intervals();
  const Index n = modes();
  if (static_cast<Index>(u.size()) != K + 1 || static_cast<Index>(out.size()) != n)
    throw ValidationError("forward transform length mismatch");
  if (use_fast(path)) {
    const Real delta = mesh_.length() / static_cast<Real>(K);
    sine_transform(u.data() + 1, out.data(), 0.5 * delta * std::sqrt(2.0 / mesh_.length()));
    return;
  }
  for (Index l = 0; l < n; ++l) {
    Complex s = 0.0;
    for (Index k = 1; k < K; ++k) s += u[static_cast<std::size_t>(k)] * (vectors_(k, l) * weights_(k));
    out[static_cast<std::size_t>(l)] = s;
  }
}

void SpectralBasis::inverse(std::span<const Complex> coeff, std::span<Complex> u, TransformPath path) const {
  const Index K = mesh_.intervals();
  const Index n = modes();
  if (static_cast<Index>(u.size()) != K + 1 || static_cast<Index>(coeff.size()) != n)
    throw ValidationError("inverse transform length mismatch");
  u[0] = 0.0;
  u[static_cast<std::size_t>(K)] = 0.0;
  if (use_fast(path)) {
    sine_transform(coeff.data(), u.data() + 1, 0.5 * std::sqrt(2.0 / mesh_.length()));
    return;
  }
  for (Index k = 1; k < K; ++k) {
    Complex s = 0.0;
    for (Index l = 0; l < n; ++l) s += coeff[static_cast<std::size_t>(l)] * vectors_(k, l);
    u[static_cast<std::size_t>(k)] = s;
  }
}

ComplexVector SpectralBasis::forward(const ComplexVector& u, TransformPath path) const {
  ComplexVector out(modes());
  forward(std::span<const Complex>(u.data(), static_cast<std::size_t>(u.size())),
          std::span<Complex>(out.data(), static_cast<std::size_t>(out.size())), path);
  return out;
}

ComplexVector SpectralBasis::inverse(const ComplexVector& coeff, TransformPath path) const {
  ComplexVector u(mesh_.size());
  inverse(std::span<const Complex>(coeff.data(), static_cast<std::size_t>(coeff.size())),
          std::span<Complex>(u.data(), static_cast<std::size_t>(u.size())), path);
  return u;
}

ComplexVector apply_y_laplacian(const AxisMesh& y, const ComplexVector& u) {
  const Index K = y.intervals();
  if (u.size() != K + 1) throw ValidationError("y-laplacian length mismatch");
  ComplexVector out = ComplexVector::Zero(K + 1);
  for (Index k = 1; k < K; ++k)
    out(k) = -((u(k + 1) - u(k)) / y.step(k + 1) - (u(k) - u(k - 1)) / y.step(k)) / y.half_step(k);
  return out;
}

}  // namespace qstrip
