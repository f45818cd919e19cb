#include "qstrip/splitting_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace qstrip {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

KernelSetParameters boundary_parameters(const SampledCoefficients& c, Real h, Real tau) {
  const Asymptotics& a = c.asymptotics;
  return {c.hbar, a.rho, a.b1, a.b2, a.v, h, tau};
}

bool row_constant(const RealGrid& g, Index j, Index k0, Index k1) {
  for (Index k = k0 + 1; k <= k1; ++k)
    if (g(j, k) != g(j, k0)) return false;
  return true;
}

}  // namespace

ComplexVector ModeSystem::rhs(const ComplexVector& v, const ComplexVector* forcing, Complex right_history,
                              Complex left_history) const {
  const Index n = matrix.size();
  if (v.size() != n || (forcing && forcing->size() != n)) throw ValidationError("mode system: length mismatch");
  ComplexVector out(n);
  for (Index j = 0; j < n; ++j) {
    Complex s = rhs_diag(j) * v(j);
    if (j > 0) s += rhs_sub(j) * v(j - 1);
    if (j + 1 < n) s += rhs_sup(j) * v(j + 1);
    if (forcing) s += forcing_scale(j) * (*forcing)(j);
    out(j) = s;
  }
  out(n - 1) += right_history_scale * right_history;
  out(0) += left_history_scale * left_history;
  return out;
}

RealVector mode_potential(const SampledCoefficients& c, const SpectralBasis& basis, Index l) {
  const Index J = c.J();
  RealVector v(J + 1);
  const Real lambda = basis.eigenvalue(l);
  for (Index j = 0; j <= J; ++j) v(j) = 0.5 * c.hbar * c.hbar * c.b22h(j, 1) * lambda + c.v_tilde_h(j);
  return v;
}

ModeSystem assemble_mode_system(const SampledCoefficients& c, const SpectralBasis& basis, Index l, Real tau,
                                BoundaryKind left, BoundaryKind right, const KernelSet* right_kernels,
                                const KernelSet* left_kernels) {
  require(l >= 1 && l <= basis.modes(), "mode index out of range");
  require(tau > 0.0, "time step must be positive");
  if (right == BoundaryKind::transparent) require(right_kernels != nullptr, "right transparent boundary needs kernels");
  if (left == BoundaryKind::transparent) require(left_kernels != nullptr, "left transparent boundary needs kernels");

  const Index J = c.J();
  const Index n = J + 1;
  const Real hb2 = 0.5 * c.hbar * c.hbar;
  ModeSystem s;
  s.mode = l;
  s.mode_potential = mode_potential(c, basis, l);
  s.matrix.sub = ComplexVector::Zero(n);
  s.matrix.diag = ComplexVector::Zero(n);
  s.matrix.sup = ComplexVector::Zero(n);
  s.rhs_sub = ComplexVector::Zero(n);
  s.rhs_diag = ComplexVector::Zero(n);
  s.rhs_sup = ComplexVector::Zero(n);
  s.forcing_scale = ComplexVector::Zero(n);

  for (Index j = 1; j < J; ++j) {
    const Real hh = c.x.half_step(j);
    const Real am = hb2 * c.b11h(j, 1) / (c.x.step(j) * hh);
    const Real ap = hb2 * c.b11h(j + 1, 1) / (c.x.step(j + 1) * hh);
    const Complex at = I * c.hbar * c.rho_h(j, 1) / tau;
    const Real d = 0.5 * (am + ap + s.mode_potential(j));
    s.matrix.sub(j) = 0.5 * am;
    s.matrix.diag(j) = at - d;
    s.matrix.sup(j) = 0.5 * ap;
    s.rhs_sub(j) = -0.5 * am;
    s.rhs_diag(j) = at + d;
    s.rhs_sup(j) = -0.5 * ap;
    s.forcing_scale(j) = 1.0;
  }

  // beta (u_b - u_n) + beta (v_b - v_n) - (h/2) [a (u_b - v_b) - V (u_b + v_b)/2] + (h/2) F_b
  //   = beta (R^0 u_b + history)
  auto boundary_row = [&](Index b, const KernelSet& k, Complex& a_near, Complex& b_near, Complex& hist_scale) {
    const Real h = k.params.h;
    const Real beta = hb2 * k.params.b1 / (2.0 * h);
    const Complex at = I * c.hbar * k.params.rho / tau;
    const Real vb = k.v_mode(l - 1);
    s.matrix.diag(b) = beta - 0.5 * h * at + 0.25 * h * vb - beta * k.r(0, l - 1);
    a_near = -beta;
    s.rhs_diag(b) = -beta - 0.5 * h * at - 0.25 * h * vb;
    b_near = beta;
    s.forcing_scale(b) = -0.5 * h;
    hist_scale = beta;
  };

  if (right == BoundaryKind::transparent) {
    boundary_row(J, *right_kernels, s.matrix.sub(J), s.rhs_sub(J), s.right_history_scale);
  } else {
    s.matrix.diag(J) = 1.0;
  }
  if (left == BoundaryKind::transparent) {
    boundary_row(0, *left_kernels, s.matrix.sup(0), s.rhs_sup(0), s.left_history_scale);
  } else {
    s.matrix.diag(0) = 1.0;
  }
  return s;
}

SplittingSolver::SplittingSolver(const Problem& problem, const Field& psi0, const SolverOptions& options)
    : problem_(problem),
      coeffs_(sample_coefficients(problem.model, problem.x, problem.y)),
      basis_(problem.y) {
  validate(psi0);
  const Index J = coeffs_.J();
  const Index modes = basis_.modes();
  const Index M = problem_.t.levels();
  const Index kernel_length = std::max<Index>(M, 1);

  const auto t0 = Clock::now();
  auto obtain = [&](const KernelSet* given, Real h) {
    if (given) {
      require(given->modes() == modes && given->length() >= M, "supplied kernels do not fit the problem");
      require(given->params.h == h && given->params.tau == problem_.t.step(1),
              "supplied kernels were built for a different h or tau");
      return *given;
    }
    return build_kernel_set(boundary_parameters(coeffs_, h, problem_.t.step(1)), basis_, kernel_length,
                            problem_.kernel_method, options.cache);
  };
  if (problem_.right == BoundaryKind::transparent && M > 0) right_ = obtain(options.right_kernels, problem_.x.tail_step());
  if (problem_.left == BoundaryKind::transparent && M > 0) left_ = obtain(options.left_kernels, problem_.x.head_step());
  counters_.kernel_seconds = seconds_since(t0);

  psi_ = psi0;
  breve_ = Field::Zero(J + 1, coeffs_.K() + 1);
  tilde_ = breve_;
  v_modal_.setZero(J + 1, modes);
  f_modal_.setZero(J + 1, modes);
  rhs_.setZero(J + 1, modes);
  u_modal_.setZero(J + 1, modes);
  right_part_ = ComplexVector::Zero(modes);
  left_part_ = ComplexVector::Zero(modes);

  history_right_ = BoundaryHistory(modes, M + 1);
  history_left_ = BoundaryHistory(modes, M + 1);
  history_right_.append(basis_.forward(ComplexVector(psi_.row(J).transpose()), problem_.transform));
  history_left_.append(basis_.forward(ComplexVector(psi_.row(0).transpose()), problem_.transform));

  mass_.reserve(static_cast<std::size_t>(M + 1));
  mass_.push_back(weighted_mass(psi_));
  flux_right_.assign(1, 0.0);
  flux_left_.assign(1, 0.0);
}

void SplittingSolver::validate(const Field& psi0) const {
  const Index J = coeffs_.J();
  const Index K = coeffs_.K();
  require(J >= 4, "x-mesh needs J >= 4");
  require(psi0.rows() == J + 1 && psi0.cols() == K + 1, "initial field shape does not match the mesh");
  require(psi0.allFinite(), "initial field is not finite");
  require(!coeffs_.has_cross_terms, "B12 != 0: use the reference Crank-Nicolson solver for cross terms");
  for (Index j = 0; j <= J; ++j) {
    require(row_constant(coeffs_.rho_h, j, 0, K) && row_constant(coeffs_.b22h, j, 0, K + 1),
            "rho and B22 must not depend on y for the splitting solver");
  }
  for (Index j = 0; j <= J + 1; ++j)
    require(row_constant(coeffs_.b11h, j, 0, K), "B11 must not depend on y for the splitting solver");

  const bool tbc = problem_.left == BoundaryKind::transparent || problem_.right == BoundaryKind::transparent;
  if (tbc) require(problem_.t.uniform(), "transparent boundaries require a uniform time mesh");

  for (Index j = 0; j <= J; ++j)
    if (psi0(j, 0) != 0.0 || psi0(j, K) != 0.0) throw ValidationError("initial field must vanish at k = 0 and k = K");

  const Asymptotics& a = coeffs_.asymptotics;
  auto check_boundary_row = [&](Index j, Index cell_outer, const char* side) {
    const std::string where = std::string(" on the ") + side + " boundary row";
    for (Index k = 0; k <= K; ++k) {
      require(coeffs_.delta_v_h(j, k) == 0.0, "V - V_tilde must vanish" + where);
      require(coeffs_.rho_h(j, k) == a.rho, "rho must equal rho_inf" + where);
      require(coeffs_.b11h(j, k) == a.b1 && coeffs_.b11h(cell_outer, k) == a.b1, "B11 must equal B1_inf" + where);
    }
    require(coeffs_.b22h(j, 1) == a.b2, "B22 must equal B2_inf" + where);
    require(coeffs_.v_tilde_h(j) == a.v, "V_tilde must equal V_inf" + where);
    for (Index k = 0; k <= K; ++k)
      require(psi0(j, k) == 0.0, "initial field must vanish" + where);
  };
  if (problem_.right == BoundaryKind::transparent) check_boundary_row(J, J + 1, "right");
  if (problem_.left == BoundaryKind::transparent) check_boundary_row(0, 1, "left");
  if (problem_.left == BoundaryKind::dirichlet)
    for (Index k = 0; k <= K; ++k) require(psi0(0, k) == 0.0, "initial field must vanish at j = 0");
  if (problem_.right == BoundaryKind::dirichlet)
    for (Index k = 0; k <= K; ++k) require(psi0(J, k) == 0.0, "initial field must vanish at j = J");
}

void SplittingSolver::prepare(Real tau) {
  if (tau == tau_) return;
  tau_ = tau;
  propagator_ = build_propagator(coeffs_, tau, problem_.propagator);
  const Index n = coeffs_.J() + 1;
  const Index modes = basis_.modes();
  lu_sub_.resize(n, modes);
  lu_inv_pivot_.resize(n, modes);
  lu_sup_.resize(n, modes);
  b_sub_.resize(n, modes);
  b_diag_.resize(n, modes);
  b_sup_.resize(n, modes);
  f_scale_.resize(n, modes);
  for (Index l = 1; l <= modes; ++l) {
    const ModeSystem s = assemble_mode_system(coeffs_, basis_, l, tau, problem_.left, problem_.right,
                                              right_ ? &*right_ : nullptr, left_ ? &*left_ : nullptr);
    TridiagonalFactorization lu;
    try {
      lu = TridiagonalFactorization(s.matrix);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (mode " + std::to_string(l) + ")");
    }
    lu_sub_.col(l - 1) = lu.sub();
    lu_inv_pivot_.col(l - 1) = lu.inv_pivot();
    lu_sup_.col(l - 1) = lu.sup_scaled();
    b_sub_.col(l - 1) = s.rhs_sub;
    b_diag_.col(l - 1) = s.rhs_diag;
    b_sup_.col(l - 1) = s.rhs_sup;
    f_scale_.col(l - 1) = s.forcing_scale;
    right_scale_ = s.right_history_scale;
    left_scale_ = s.left_history_scale;
  }
}

void SplittingSolver::forward_rows(const Field& in, ModeMatrix& out) const {
  const auto K1 = static_cast<std::size_t>(in.cols());
  const auto modes = static_cast<std::size_t>(out.cols());
  for (Index j = 0; j < in.rows(); ++j)
    basis_.forward(std::span<const Complex>(&in(j, 0), K1), std::span<Complex>(&out(j, 0), modes), problem_.transform);
}

Real SplittingSolver::weighted_mass(const Field& w) const {
  return weighted_norm_2d(w, coeffs_.rho_h, coeffs_.x, coeffs_.y, problem_.norm_kind());
}

Real SplittingSolver::boundary_flux(const KernelSet& k, const BoundaryHistory& hist, const ComplexVector& history_part,
                                    Index m) const {
  Complex sum = 0.0;
  for (Index l = 0; l < k.modes(); ++l) {
    const Complex conv = k.r(0, l) * hist.at(m, l) + history_part(l);
    sum += conv * std::conj(0.5 * (hist.at(m, l) + hist.at(m - 1, l)));
  }
  return coeffs_.hbar * k.params.b1 * tau_ * sum.imag() / (2.0 * k.params.h);
}

void SplittingSolver::step(const Field* forcing) {
  const Index m = level_ + 1;
  require(m <= problem_.t.levels(), "time mesh exhausted");
  const Index J = coeffs_.J();
  const Index K = coeffs_.K();
  const Index modes = basis_.modes();
  if (forcing) {
    require(forcing->rows() == J + 1 && forcing->cols() == K + 1, "forcing shape does not match the mesh");
    for (Index j = 0; j <= J; ++j)
      require((*forcing)(j, 0) == 0.0 && (*forcing)(j, K) == 0.0, "forcing must vanish at k = 0 and k = K");
  }
  const auto t_step = Clock::now();
  prepare(problem_.t.step(m));

  // 1. potential half kick
  breve_ = propagator_.values * psi_;

  // 2. y-transform per x-slice
  auto t0 = Clock::now();
  forward_rows(breve_, v_modal_);
  if (forcing) forward_rows(*forcing, f_modal_);
  counters_.transform_seconds += seconds_since(t0);

  // 3. per-mode solves
  t0 = Clock::now();
  const Index n = J + 1;
  for (Index j = 0; j < n; ++j) {
    auto r = rhs_.row(j);
    r = b_diag_.row(j) * v_modal_.row(j);
    if (j > 0) r += b_sub_.row(j) * v_modal_.row(j - 1);
    if (j + 1 < n) r += b_sup_.row(j) * v_modal_.row(j + 1);
    if (forcing) r += f_scale_.row(j) * f_modal_.row(j);
  }
  const auto t_conv = Clock::now();
  auto history_part = [&](const KernelSet& k, const BoundaryHistory& hist, ComplexVector& out) {
    for (Index l = 0; l < modes; ++l) {
      const Complex* rk = k.r.col(l).data();
      Complex s = 0.0;
      for (Index q = 1; q <= m; ++q) s += rk[q] * hist.at(m - q, l);
      out(l) = s;
    }
  };
  if (right_) {
    history_part(*right_, history_right_, right_part_);
    rhs_.row(J) += right_scale_ * right_part_.transpose().array();
  }
  if (left_) {
    history_part(*left_, history_left_, left_part_);
    rhs_.row(0) += left_scale_ * left_part_.transpose().array();
  }
  const double conv_seconds = seconds_since(t_conv);
  counters_.convolution_seconds += conv_seconds;

  u_modal_.row(0) = rhs_.row(0) * lu_inv_pivot_.row(0);
  for (Index j = 1; j < n; ++j)
    u_modal_.row(j) = (rhs_.row(j) - lu_sub_.row(j) * u_modal_.row(j - 1)) * lu_inv_pivot_.row(j);
  for (Index j = n - 2; j >= 0; --j) u_modal_.row(j) -= lu_sup_.row(j) * u_modal_.row(j + 1);
  counters_.solve_seconds += seconds_since(t0) - conv_seconds;

  history_right_.append(u_modal_.row(J).transpose());
  history_left_.append(u_modal_.row(0).transpose());

  // 4. inverse transform
  t0 = Clock::now();
  const auto K1 = static_cast<std::size_t>(K + 1);
  const auto nm = static_cast<std::size_t>(modes);
  for (Index j = 0; j <= J; ++j)
    basis_.inverse(std::span<const Complex>(&u_modal_(j, 0), nm), std::span<Complex>(&tilde_(j, 0), K1),
                   problem_.transform);
  if (problem_.left == BoundaryKind::dirichlet) tilde_.row(0).setZero();
  if (problem_.right == BoundaryKind::dirichlet) tilde_.row(J).setZero();
  counters_.transform_seconds += seconds_since(t0);

  // 5. potential half kick
  psi_ = propagator_.values * tilde_;

  level_ = m;
  mass_.push_back(weighted_mass(psi_));
  flux_right_.push_back(right_ ? boundary_flux(*right_, history_right_, right_part_, m) : 0.0);
  flux_left_.push_back(left_ ? boundary_flux(*left_, history_left_, left_part_, m) : 0.0);
  ++counters_.steps;
  counters_.total_seconds += seconds_since(t_step);
}

RunResult run(const Problem& problem, const Field& psi0, const RunOptions& options) {
  SplittingSolver solver(problem, psi0, options.solver);
  RunResult out;
  const Index M = problem.t.levels();
  for (Index s : options.snapshot_levels) require(s >= 0 && s <= M, "snapshot level out of range");
  auto record = [&] {
    const Index m = solver.level();
    if (std::find(options.snapshot_levels.begin(), options.snapshot_levels.end(), m) != options.snapshot_levels.end())
      out.snapshots.push_back({m, solver.time(), solver.psi()});
    if (options.record_right_traces) out.right_traces.emplace_back(solver.psi().row(problem.x.intervals()).transpose());
    if (options.observer) options.observer(solver);
  };
  record();
  for (Index m = 1; m <= M; ++m) {
    solver.step();
    record();
  }
  out.psi = solver.psi();
  out.mass = solver.mass_trace();
  out.flux_right = solver.flux_right();
  out.flux_left = solver.flux_left();
  out.counters = solver.counters();
  return out;
}

RunResult run_infinite_strip(Problem problem, const Field& psi0, const RunOptions& options) {
  problem.left = BoundaryKind::transparent;
  problem.right = BoundaryKind::transparent;
  return run(problem, psi0, options);
}

}  // namespace qstrip
