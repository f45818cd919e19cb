#include "qstrip/tbc.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>

#include <fftw3.h>

#include "fftw_lock.hpp"
#include "qstrip/tridiagonal.hpp"

namespace qstrip {

namespace {

void check_params(const ModeParameters& p) {
  require(p.hbar > 0.0 && p.rho > 0.0 && p.b1 > 0.0, "mode parameters: hbar, rho, b1 must be positive");
  require(p.h > 0.0 && p.tau > 0.0, "mode parameters: h and tau must be positive");
}

/// 2 h^2 / (hbar^2 b1)
Real stiffness_scale(const ModeParameters& p) { return 2.0 * p.h * p.h / (p.hbar * p.hbar * p.b1); }

/// Larger root Q of kappa^2 - (2 + c) kappa + 1 = 0; kappa = 1 / Q.
Complex large_root(Complex c) {
  const Complex b = 2.0 + c;
  Complex s = std::sqrt(b * b - 4.0);
  if (std::abs(b + s) < std::abs(b - s)) s = -s;
  return 0.5 * (b + s);
}

Complex symbol_c(const ModeParameters& p, Complex z) {
  const Complex zi = 1.0 / z;
  const Complex ratio = (2.0 / p.tau) * (1.0 - zi) / (1.0 + zi);  // d_t / s_t
  return stiffness_scale(p) * (p.v_mode - I * p.hbar * p.rho * ratio);
}

using detail::fftw_planner_mutex;

}  // namespace

Complex characteristic_root(const ModeParameters& p, Complex z) {
  check_params(p);
  return 1.0 / large_root(symbol_c(p, z));
}

Complex kernel_symbol(const ModeParameters& p, Complex z) {
  check_params(p);
  const Complex q = large_root(symbol_c(p, z));
  return 0.5 * (1.0 + 1.0 / z) * (1.0 / q - q);
}

ModeKernel kernel_inverse_z(const ModeParameters& p, Index M, const InverseZOptions& options) {
  check_params(p);
  require(M >= 1, "kernel length M must be at least 1");
  const Index N = options.samples > 0 ? options.samples : 4 * (M + 1);
  if (N < 2 * M + 2) throw ValidationError("inverse Z-transform needs at least 2M+2 samples");

  // Aliasing is ~ r^{-N}, roundoff ~ eps r^M.
  Real r = options.radius > 0.0 ? options.radius : std::exp(std::log(1e14) / static_cast<Real>(N));
  require(r > 1.0, "inverse Z-transform radius must exceed 1");

  std::vector<Complex> samples(static_cast<std::size_t>(N));
  for (int attempt = 0;; ++attempt) {
    bool degenerate = false;
    for (Index n = 0; n < N; ++n) {
      const Complex z = std::polar(r, 2.0 * std::numbers::pi * static_cast<Real>(n) / static_cast<Real>(N));
      const Complex q = large_root(symbol_c(p, z));
      if (std::abs(std::abs(q) - 1.0) < 1e-12) {
        degenerate = true;
        break;
      }
      samples[static_cast<std::size_t>(n)] = 0.5 * (1.0 + 1.0 / z) * (1.0 / q - q);
    }
    if (!degenerate) break;
    if (attempt == 8) throw NumericalError("kernel symbol has characteristic roots on the unit circle");
    r *= 1.0 + 1e-3;
  }

  std::vector<Complex> out(samples.size());
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(N), reinterpret_cast<fftw_complex*>(samples.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan) throw NumericalError("failed to create inverse Z-transform plan");
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }

  ModeKernel k;
  k.params = p;
  k.r.resize(M + 1);
  Real rm = 1.0;
  for (Index m = 0; m <= M; ++m) {
    k.r(m) = out[static_cast<std::size_t>(m)] * (rm / static_cast<Real>(N));
    rm *= r;
  }
  return k;
}

Index default_exterior_nodes(Index M) { return 20 * (M + 1) + 100; }

ModeKernel kernel_impulse_oracle(const ModeParameters& p, Index M, Index exterior_nodes) {
  check_params(p);
  require(M >= 1, "kernel length M must be at least 1");
  const Index n_ext = exterior_nodes > 0 ? exterior_nodes : default_exterior_nodes(M);
  if (n_ext < M + 16) throw ValidationError("exterior truncation too short for the requested kernel length");

  // Unknowns psi_{J+1}..psi_{J+n_ext-1}; psi_J prescribed, psi_{J+n_ext} = 0.
  const Index n = n_ext - 1;
  const Real g = p.hbar * p.hbar * p.b1 / (2.0 * p.h * p.h);
  const Complex a_time = I * p.hbar * p.rho / p.tau;
  // a_time (u - v) = L (u + v) / 2,  L w = -g (w_{j+1} - 2 w_j + w_{j-1}) + v_mode w_j
  TridiagonalSystem sys;
  sys.sub = ComplexVector::Constant(n, 0.5 * g);
  sys.sup = ComplexVector::Constant(n, 0.5 * g);
  sys.diag = ComplexVector::Constant(n, a_time - 0.5 * (2.0 * g + p.v_mode));
  const TridiagonalFactorization lu(sys);

  const Real s2 = stiffness_scale(p);
  ComplexVector prev = ComplexVector::Zero(n);
  Complex bnd_prev = 0.0;
  ModeKernel k;
  k.params = p;
  k.r.resize(M + 1);
  for (Index m = 1; m <= M + 1; ++m) {
    const Complex bnd = m == 1 ? 1.0 : 0.0;
    ComplexVector rhs(n);
    for (Index i = 0; i < n; ++i) {
      const Complex left = i == 0 ? bnd_prev : prev(i - 1);
      const Complex right = i + 1 < n ? prev(i + 1) : Complex(0.0);
      rhs(i) = a_time * prev(i) + 0.5 * (-g * (right - 2.0 * prev(i) + left) + p.v_mode * prev(i));
    }
    rhs(0) -= 0.5 * g * bnd;
    const ComplexVector cur = lu.solve(rhs);

    // s_t(psi_{J+1} - psi_{J-1}) with psi_{J-1} eliminated via the equation at J.
    const Complex st_j = 0.5 * (bnd + bnd_prev);
    const Complex dt_j = (bnd - bnd_prev) / p.tau;
    const Complex st_next = 0.5 * (cur(0) + prev(0));
    const Complex response = 2.0 * st_next - 2.0 * st_j - s2 * (p.v_mode * st_j - I * p.hbar * p.rho * dt_j);
    k.r(m - 1) = response;

    prev = cur;
    bnd_prev = bnd;
  }
  return k;
}

ModeKernel KernelCache::get(const ModeParameters& p, Index M, KernelMethod method) {
  const Key key{p.hbar, p.rho, p.b1, p.h, p.tau, p.v_mode, M, static_cast<int>(method)};
  {
    std::lock_guard lock(mutex_);
    if (auto it = kernels_.find(key); it != kernels_.end()) return it->second;
  }
  ModeKernel k = method == KernelMethod::inverse_z ? kernel_inverse_z(p, M) : kernel_impulse_oracle(p, M);
  std::lock_guard lock(mutex_);
  kernels_.emplace(key, k);
  return k;
}

std::size_t KernelCache::size() const {
  std::lock_guard lock(mutex_);
  return kernels_.size();
}

ModeKernel KernelSet::mode(Index l) const {
  ModeKernel k;
  k.params = params.mode(0.0);
  k.params.v_mode = v_mode(l - 1);
  k.r = r.col(l - 1);
  return k;
}

KernelSet build_kernel_set(const KernelSetParameters& params, const SpectralBasis& basis, Index M,
                           KernelMethod method, KernelCache* cache) {
  KernelSet set;
  set.params = params;
  set.r.resize(M + 1, basis.modes());
  set.v_mode.resize(basis.modes());
  for (Index l = 1; l <= basis.modes(); ++l) {
    const ModeParameters p = params.mode(basis.eigenvalue(l));
    ModeKernel k;
    if (cache) {
      k = cache->get(p, M, method);
    } else {
      k = method == KernelMethod::inverse_z ? kernel_inverse_z(p, M) : kernel_impulse_oracle(p, M);
    }
    set.r.col(l - 1) = k.r;
    set.v_mode(l - 1) = p.v_mode;
  }
  return set;
}

BoundaryHistory::BoundaryHistory(Index modes, Index capacity_levels)
    : values_(Eigen::MatrixXcd::Zero(capacity_levels, modes)) {}

void BoundaryHistory::append(const ComplexVector& v) {
  if (v.size() != modes()) throw ValidationError("boundary history: mode count mismatch");
  if (size_ >= values_.rows()) {
    Eigen::MatrixXcd grown = Eigen::MatrixXcd::Zero(std::max<Index>(2 * values_.rows(), 8), modes());
    grown.topRows(size_) = values_.topRows(size_);
    values_.swap(grown);
  }
  values_.row(size_) = v.transpose();
  ++size_;
}

Complex convolve(const KernelSet& kernels, const BoundaryHistory& history, Index mode_index, Index m,
                 bool include_current) {
  if (m > kernels.length()) throw ValidationError("history is longer than the kernel");
  if (m >= history.size()) throw ValidationError("history does not reach the requested level");
  Complex sum = 0.0;
  const Complex* r = kernels.r.col(mode_index).data();
  for (Index q = include_current ? 0 : 1; q <= m; ++q) sum += r[q] * history.at(m - q, mode_index);
  return sum;
}

ComplexVector apply_s_ref(const BoundaryHistory& history, const KernelSet& kernels, const SpectralBasis& basis) {
  if (history.modes() != basis.modes() || kernels.modes() != basis.modes())
    throw ValidationError("S_ref: mode count mismatch");
  const Index m = history.level();
  ComplexVector modal(basis.modes());
  for (Index l = 0; l < basis.modes(); ++l) modal(l) = convolve(kernels, history, l, m) / (2.0 * kernels.params.h);
  return basis.inverse(modal);
}

namespace {
BoundaryHistory modal_history(const SpectralBasis& basis, const std::vector<ComplexVector>& phi) {
  require(!phi.empty(), "positivity check needs Phi^0");
  BoundaryHistory hist(basis.modes(), static_cast<Index>(phi.size()));
  for (const auto& level : phi) hist.append(basis.forward(level));
  return hist;
}
}  // namespace

RealVector positivity_partial_sums(const KernelSet& kernels, const SpectralBasis& basis,
                                   const std::vector<ComplexVector>& phi) {
  const Index M = static_cast<Index>(phi.size()) - 1;
  require(M <= kernels.length(), "positivity check: history longer than kernels");
  const RealVector wy = node_weights(basis.mesh(), InnerProductKind::interior);
  BoundaryHistory hist(basis.modes(), M + 1);
  RealVector partial(M);
  Real acc = 0.0;
  for (Index m = 0; m <= M; ++m) {
    hist.append(basis.forward(phi[static_cast<std::size_t>(m)]));
    if (m == 0) continue;
    const ComplexVector s = apply_s_ref(hist, kernels, basis);
    const ComplexVector avg = 0.5 * (phi[static_cast<std::size_t>(m)] + phi[static_cast<std::size_t>(m - 1)]);
    Complex ip = 0.0;
    for (Index k = 1; k + 1 < s.size(); ++k) ip += s(k) * std::conj(avg(k)) * wy(k);
    acc += ip.imag() * kernels.params.tau;
    partial(m - 1) = acc;
  }
  return partial;
}

Real check_positivity(const KernelSet& kernels, const SpectralBasis& basis, const std::vector<ComplexVector>& phi) {
  const RealVector p = positivity_partial_sums(kernels, basis, phi);
  return p.size() == 0 ? 0.0 : p(p.size() - 1);
}

Eigen::MatrixXd positivity_per_mode(const KernelSet& kernels, const SpectralBasis& basis,
                                    const std::vector<ComplexVector>& phi) {
  const Index M = static_cast<Index>(phi.size()) - 1;
  const BoundaryHistory hist = modal_history(basis, phi);
  Eigen::MatrixXd out(M, basis.modes());
  for (Index l = 0; l < basis.modes(); ++l) {
    Real acc = 0.0;
    for (Index m = 1; m <= M; ++m) {
      const Complex s = convolve(kernels, hist, l, m) / (2.0 * kernels.params.h);
      const Complex avg = 0.5 * (hist.at(m, l) + hist.at(m - 1, l));
      acc += (s * std::conj(avg)).imag() * kernels.params.tau;
      out(m - 1, l) = acc;
    }
  }
  return out;
}

namespace {
static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ValidationError("truncated kernel file");
  return v;
}
}  // namespace

void write_kernels_binary(const std::filesystem::path& path, const KernelSet& k) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write("QKRN", 4);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(k.modes()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(k.length()));
  for (Real v : {k.params.hbar, k.params.rho, k.params.b1, k.params.b2, k.params.v, k.params.h, k.params.tau})
    put<double>(os, v);
  for (Index l = 0; l < k.modes(); ++l) {
    put<double>(os, k.v_mode(l));
    for (Index m = 0; m <= k.length(); ++m) {
      put<double>(os, k.r(m, l).real());
      put<double>(os, k.r(m, l).imag());
    }
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

KernelSet read_kernels_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open kernel file " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "QKRN", 4) != 0) throw ValidationError("not a kernel file: " + path.string());
  if (get<std::uint32_t>(is) != 1) throw ValidationError("unsupported kernel file version");
  const auto modes = static_cast<Index>(get<std::uint32_t>(is));
  const auto M = static_cast<Index>(get<std::uint32_t>(is));
  KernelSet k;
  k.params.hbar = get<double>(is);
  k.params.rho = get<double>(is);
  k.params.b1 = get<double>(is);
  k.params.b2 = get<double>(is);
  k.params.v = get<double>(is);
  k.params.h = get<double>(is);
  k.params.tau = get<double>(is);
  k.r.resize(M + 1, modes);
  k.v_mode.resize(modes);
  for (Index l = 0; l < modes; ++l) {
    k.v_mode(l) = get<double>(is);
    for (Index m = 0; m <= M; ++m) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      k.r(m, l) = Complex(re, im);
    }
  }
  return k;
}

void write_kernels_csv(const std::filesystem::path& path, const KernelSet& k) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "mode,v_mode,m,re,im\n" << std::setprecision(17);
  for (Index l = 0; l < k.modes(); ++l)
    for (Index m = 0; m <= k.length(); ++m)
      os << l + 1 << ',' << k.v_mode(l) << ',' << m << ',' << k.r(m, l).real() << ',' << k.r(m, l).imag() << '\n';
}

}  // namespace qstrip
