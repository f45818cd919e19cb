#include "qstrip/reference.hpp"

#include <algorithm>
#include <cmath>

namespace qstrip {

namespace {

KernelSetParameters boundary_parameters(const SampledCoefficients& c, Real h, Real tau) {
  const Asymptotics& a = c.asymptotics;
  return {c.hbar, a.rho, a.b1, a.b2, a.v, h, tau};
}

void check_boundary_row(const SampledCoefficients& c, Index j, Index cell_outer, const char* side) {
  const Asymptotics& a = c.asymptotics;
  const std::string where = std::string(" on the ") + side + " boundary row";
  for (Index k = 0; k <= c.K(); ++k) {
    require(c.rho_h(j, k) == a.rho, "rho must equal rho_inf" + where);
    require(c.v_h(j, k) == a.v, "V must equal V_inf" + where);
    require(c.b11h(j, k) == a.b1 && c.b11h(cell_outer, k) == a.b1, "B11 must equal B1_inf" + where);
  }
  for (Index k = 0; k <= c.K() + 1; ++k) {
    require(c.b22h(j, k) == a.b2, "B22 must equal B2_inf" + where);
    require(c.b12h(j, k) == 0.0 && c.b12h(cell_outer, k) == 0.0, "B12 must vanish" + where);
  }
}

}  // namespace

CrankNicolsonSolver::CrankNicolsonSolver(const Problem& problem, const Field& psi0, const CnOptions& options)
    : problem_(problem),
      options_(options),
      coeffs_(sample_coefficients(problem.model, problem.x, problem.y)),
      basis_(problem.y) {
  const Index J = coeffs_.J();
  const Index K = coeffs_.K();
  const Index M = problem_.t.levels();
  require(J >= 4, "x-mesh needs J >= 4");
  require(M >= 1, "reference solver needs at least one time level");
  require(problem_.t.uniform(), "reference solver requires a uniform time mesh");
  require(psi0.rows() == J + 1 && psi0.cols() == K + 1, "initial field shape does not match the mesh");
  tau_ = problem_.t.step(1);

  potential_.resize(J + 1, K + 1);
  for (Index j = 0; j <= J; ++j)
    for (Index k = 0; k <= K; ++k) potential_(j, k) = options_.use_v_tilde ? coeffs_.v_tilde_h(j) : coeffs_.v_h(j, k);

  auto obtain = [&](const KernelSet* given, Real h) {
    if (given) {
      require(given->modes() == basis_.modes() && given->length() >= M && given->params.h == h &&
                  given->params.tau == tau_,
              "supplied kernels do not fit the problem");
      return *given;
    }
    return build_kernel_set(boundary_parameters(coeffs_, h, tau_), basis_, M, problem_.kernel_method,
                            options_.solver.cache);
  };
  if (problem_.right == BoundaryKind::transparent) {
    check_boundary_row(coeffs_, J, J + 1, "right");
    right_ = obtain(options_.solver.right_kernels, problem_.x.tail_step());
  }
  if (problem_.left == BoundaryKind::transparent) {
    check_boundary_row(coeffs_, 0, 1, "left");
    left_ = obtain(options_.solver.left_kernels, problem_.x.head_step());
  }
  for (Index j = 0; j <= J; ++j)
    require(psi0(j, 0) == 0.0 && psi0(j, K) == 0.0, "initial field must vanish at k = 0 and k = K");
  for (Index k = 0; k <= K; ++k) require(psi0(J, k) == 0.0 && psi0(0, k) == 0.0, "initial field must vanish at j = 0, J");

  assemble();
  lu_ = BandedLU(matrix_);

  psi_ = psi0;
  history_right_ = BoundaryHistory(basis_.modes(), M + 1);
  history_left_ = BoundaryHistory(basis_.modes(), M + 1);
  history_right_.append(basis_.forward(ComplexVector(psi_.row(J).transpose())));
  history_left_.append(basis_.forward(ComplexVector(psi_.row(0).transpose())));
  mass_.push_back(weighted_norm_2d(psi_, coeffs_.rho_h, coeffs_.x, coeffs_.y, problem_.norm_kind()));
}

void CrankNicolsonSolver::assemble() {
  const Index J = coeffs_.J();
  const Index K = coeffs_.K();
  matrix_ = BandedMatrix((J + 1) * (K + 1), K + 2, K + 2);
  for (Index j = 0; j <= J; ++j)
    for (Index k = 0; k <= K; ++k) {
      const Index i = index(j, k);
      const bool dirichlet = k == 0 || k == K || (j == 0 && problem_.left == BoundaryKind::dirichlet) ||
                             (j == J && problem_.right == BoundaryKind::dirichlet);
      if (dirichlet) {
        matrix_(i, i) = 1.0;
        continue;
      }
      if (j == 0 || j == J) continue;
      const Stencil s = hamiltonian_stencil(coeffs_, j, k);
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          matrix_(i, index(j + a, k + b)) -= 0.5 * s[static_cast<std::size_t>(a + 1)][static_cast<std::size_t>(b + 1)];
      matrix_(i, i) += I * coeffs_.hbar * coeffs_.rho_h(j, k) / tau_ - 0.5 * potential_(j, k);
    }
  if (right_) boundary_rows(J, J - 1, *right_);
  if (left_) boundary_rows(0, 1, *left_);
}

// beta (u_b - u_n + v_b - v_n) - (h/2) [a (u_b - v_b) + (H_y - V)(u_b + v_b)/2] = beta (S-block u_b + history)
void CrankNicolsonSolver::boundary_rows(Index jb, Index jn, const KernelSet& kernels) {
  const Index K = coeffs_.K();
  const AxisMesh& y = coeffs_.y;
  const KernelSetParameters& p = kernels.params;
  const Real hb2 = 0.5 * coeffs_.hbar * coeffs_.hbar;
  const Real beta = hb2 * p.b1 / (2.0 * p.h);
  const Complex at = I * coeffs_.hbar * p.rho / tau_;
  const RealVector wy = node_weights(y, InnerProductKind::interior);
  const Eigen::MatrixXd& e = basis_.eigenvectors();
  const Eigen::VectorXcd r0 = kernels.r.row(0).transpose();
  for (Index k = 1; k < K; ++k) {
    const Index i = index(jb, k);
    const Real cm = hb2 * p.b2 / (y.step(k) * y.half_step(k));
    const Real cp = hb2 * p.b2 / (y.step(k + 1) * y.half_step(k));
    matrix_(i, index(jn, k)) -= beta;
    matrix_(i, i) += beta - 0.5 * p.h * at - 0.25 * p.h * (-(cm + cp) - p.v);
    matrix_(i, index(jb, k - 1)) -= 0.25 * p.h * cm;
    matrix_(i, index(jb, k + 1)) -= 0.25 * p.h * cp;
    for (Index kk = 1; kk < K; ++kk) {
      Complex g = 0.0;
      for (Index l = 0; l < basis_.modes(); ++l) g += e(k, l) * r0(l) * e(kk, l);
      matrix_(i, index(jb, kk)) -= beta * g * wy(kk);
    }
  }
}

void CrankNicolsonSolver::boundary_rhs(Index jb, Index jn, const KernelSet& kernels, const BoundaryHistory& hist,
                                       const Field& v, ComplexVector& rhs, Index m) const {
  const Index K = coeffs_.K();
  const AxisMesh& y = coeffs_.y;
  const KernelSetParameters& p = kernels.params;
  const Real hb2 = 0.5 * coeffs_.hbar * coeffs_.hbar;
  const Real beta = hb2 * p.b1 / (2.0 * p.h);
  const Complex at = I * coeffs_.hbar * p.rho / tau_;
  ComplexVector modal(basis_.modes());
  for (Index l = 0; l < basis_.modes(); ++l) {
    Complex s = 0.0;
    for (Index q = 1; q <= m; ++q) s += kernels.r(q, l) * hist.at(m - q, l);
    modal(l) = s;
  }
  const ComplexVector history = basis_.inverse(modal);
  for (Index k = 1; k < K; ++k) {
    const Real cm = hb2 * p.b2 / (y.step(k) * y.half_step(k));
    const Real cp = hb2 * p.b2 / (y.step(k + 1) * y.half_step(k));
    const Complex hy = cm * v(jb, k - 1) - (cm + cp) * v(jb, k) + cp * v(jb, k + 1);
    rhs(index(jb, k)) = -beta * (v(jb, k) - v(jn, k)) - 0.5 * p.h * at * v(jb, k) +
                        0.25 * p.h * (hy - p.v * v(jb, k)) + beta * history(k);
  }
}

const Field& CrankNicolsonSolver::advance(const Field& v) {
  const Index J = coeffs_.J();
  const Index K = coeffs_.K();
  const Index m = level_ + 1;
  require(m <= problem_.t.levels(), "time mesh exhausted");
  require(v.rows() == J + 1 && v.cols() == K + 1, "field shape does not match the mesh");

  const Field hv = apply_hamiltonian(coeffs_, v);
  ComplexVector rhs = ComplexVector::Zero((J + 1) * (K + 1));
  for (Index j = 1; j < J; ++j)
    for (Index k = 1; k < K; ++k)
      rhs(index(j, k)) = I * coeffs_.hbar * coeffs_.rho_h(j, k) / tau_ * v(j, k) +
                         0.5 * (hv(j, k) + potential_(j, k) * v(j, k));
  if (right_) boundary_rhs(J, J - 1, *right_, history_right_, v, rhs, m);
  if (left_) boundary_rhs(0, 1, *left_, history_left_, v, rhs, m);

  const ComplexVector u = lu_.solve(rhs);
  const Real bn = rhs.norm();
  residual_ = bn > 0.0 ? (matrix_.apply(u) - rhs).norm() / bn : (matrix_.apply(u) - rhs).norm();

  for (Index j = 0; j <= J; ++j)
    for (Index k = 0; k <= K; ++k) psi_(j, k) = u(index(j, k));
  history_right_.append(basis_.forward(ComplexVector(psi_.row(J).transpose())));
  history_left_.append(basis_.forward(ComplexVector(psi_.row(0).transpose())));
  level_ = m;
  mass_.push_back(weighted_norm_2d(psi_, coeffs_.rho_h, coeffs_.x, coeffs_.y, problem_.norm_kind()));
  return psi_;
}

void CrankNicolsonSolver::step() {
  const Field v = psi_;
  advance(v);
}

ExtendedDomain extend_domain(const Problem& p, const Field& psi0, Real factor) {
  require(factor > 1.0, "extension factor must exceed 1");
  const Index J = p.x.intervals();
  require(psi0.rows() == J + 1 && psi0.cols() == p.y.size(), "initial field shape does not match the mesh");
  const Real extra = (factor - 1.0) * p.x.length();
  const Real h_right = p.x.tail_step();
  const Index pad_right = static_cast<Index>(std::ceil(extra / h_right - 1e-9));
  Index pad_left = 0;
  Real h_left = p.x.head_step();
  if (p.left == BoundaryKind::transparent) pad_left = static_cast<Index>(std::ceil(extra / h_left - 1e-9));
  const Real shift = static_cast<Real>(pad_left) * h_left;

  std::vector<Real> nodes;
  nodes.reserve(static_cast<std::size_t>(pad_left + J + pad_right + 1));
  for (Index i = 0; i < pad_left; ++i) nodes.push_back(static_cast<Real>(i) * h_left);
  for (Index j = 0; j <= J; ++j) nodes.push_back(shift + p.x.node(j));
  for (Index i = 1; i <= pad_right; ++i) nodes.push_back(shift + p.x.back() + static_cast<Real>(i) * h_right);

  ExtendedDomain d;
  d.problem = p;
  d.problem.x = AxisMesh::x_axis(std::move(nodes));
  d.problem.left = BoundaryKind::dirichlet;
  d.problem.right = BoundaryKind::dirichlet;
  if (shift != 0.0) {
    PhysicalModel& m = d.problem.model;
    auto shifted = [shift](CoefficientFn f) { return CoefficientFn([f, shift](Real x, Real y) { return f(x - shift, y); }); };
    m.rho = shifted(m.rho);
    m.b11 = shifted(m.b11);
    m.b12 = shifted(m.b12);
    m.b22 = shifted(m.b22);
    m.v = shifted(m.v);
    m.v_tilde = [f = m.v_tilde, shift](Real x) { return f(x - shift); };
    m.x0_right += shift;
    m.x0_left += shift;
  }
  d.offset = pad_left;
  d.original_intervals = J;
  d.psi0 = Field::Zero(d.problem.x.size(), p.y.size());
  d.psi0.middleRows(pad_left, J + 1) = psi0;
  return d;
}

ExtendedRun run_extended_domain(const Problem& problem, const Field& psi0, const ExtendedDomainOptions& options) {
  ExtendedRun out;
  out.domain = extend_domain(problem, psi0, options.factor);
  if (options.wave_number > 0.0) {
    const Asymptotics& a = problem.model.asymptotics;
    const Real speed = std::sqrt(2.0) * options.wave_number * problem.model.hbar * a.b1 / a.rho;
    const Real travel = speed * problem.t.final_time();
    const Real room = 2.0 * (options.factor - 1.0) * problem.x.length();
    if (1.5 * travel > room)
      throw ValidationError("extension factor " + std::to_string(options.factor) +
                            " is too small: waves travel about " + std::to_string(travel) + " during the run");
  }
  RunOptions opts = options.run;
  const ExtendedDomain& d = out.domain;
  auto user = opts.observer;
  opts.observer = [&out, &d, user](const SplittingSolver& s) {
    out.restricted.push_back(d.restrict(s.psi()));
    if (user) user(s);
  };
  out.result = run(d.problem, d.psi0, opts);
  return out;
}

EnergyBalance energy_identity(const ExtendedRun& run, const Problem& original, KernelCache* cache) {
  require(original.left == BoundaryKind::dirichlet, "energy identity is evaluated for semi-infinite problems");
  require(!run.restricted.empty(), "extended run has no recorded levels");
  const Index J = original.x.intervals();
  const Index M = static_cast<Index>(run.restricted.size()) - 1;
  require(M >= 1, "energy identity needs at least one step");
  const SampledCoefficients c = sample_coefficients(original.model, original.x, original.y);
  const SpectralBasis basis(original.y);
  const Real h = original.x.tail_step();
  const KernelSet kernels =
      build_kernel_set(boundary_parameters(c, h, original.t.step(1)), basis, M, original.kernel_method, cache);

  std::vector<ComplexVector> traces;
  traces.reserve(static_cast<std::size_t>(M + 1));
  for (const Field& f : run.restricted) traces.emplace_back(f.row(J).transpose());
  const RealVector partial = positivity_partial_sums(kernels, basis, traces);

  EnergyBalance e;
  e.flux_sum = c.hbar * c.asymptotics.b1 * partial(M - 1);
  const Field& psi = run.result.psi;
  const RealVector wy = node_weights(original.y, InnerProductKind::interior);
  const Index jb = run.domain.offset + J;
  Real tail = 0.0;
  for (Index j = jb; j < psi.rows(); ++j) {
    Real row = 0.0;
    for (Index k = 1; k + 1 < psi.cols(); ++k) row += std::norm(psi(j, k)) * wy(k);
    tail += row * (j == jb ? 0.5 * h : h);
  }
  e.tail_norm = c.asymptotics.rho * tail;
  e.relative_gap = std::abs(e.flux_sum - e.tail_norm) / std::max(std::abs(e.tail_norm), 1e-300);
  return e;
}

FactorizationCheck check_factorized_forms(const SampledCoefficients& c, const CayleyPropagator& kick,
                                          const Field& previous, const Field& next) {
  const Index J = c.J();
  const Index K = c.K();
  require(previous.rows() == J + 1 && previous.cols() == K + 1 && next.rows() == J + 1 && next.cols() == K + 1,
          "field shape does not match the mesh");
  const Field a = kick.values * previous;
  const Field b = kick.values.conjugate() * next;
  const Field ha = apply_hamiltonian(c, a);
  const Field hb = apply_hamiltonian(c, b);
  const Real half = 0.5 * kick.tau;
  Real dev = 0.0, scale = 0.0;
  for (Index j = 1; j < J; ++j)
    for (Index k = 1; k < K; ++k) {
      const Complex r = I * c.hbar * c.rho_h(j, k);
      const Complex lhs = r * b(j, k) - half * (hb(j, k) + c.v_tilde_h(j) * b(j, k));
      const Complex rhs = r * a(j, k) + half * (ha(j, k) + c.v_tilde_h(j) * a(j, k));
      dev = std::max(dev, std::abs(lhs - rhs));
      scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
    }
  FactorizationCheck out;
  out.deviation = scale > 0.0 ? dev / scale : dev;
  out.stage_modulus = ((kick.values * previous).abs() - previous.abs()).abs().maxCoeff();
  return out;
}

FactorizationCheck check_factorized_forms(const SplittingSolver& solver, const Field& previous) {
  require(solver.level() >= 1, "solver has not stepped yet");
  FactorizationCheck out = check_factorized_forms(solver.coefficients(), solver.propagator(), previous, solver.psi());
  const Real kick1 = (solver.psi_breve().abs() - previous.abs()).abs().maxCoeff();
  const Real kick2 = (solver.psi().abs() - solver.psi_tilde().abs()).abs().maxCoeff();
  out.stage_modulus = std::max(kick1, kick2);
  return out;
}

Complex sesquilinear_form(const SampledCoefficients& c, const Field& u, const Field& w, const RealGrid* potential) {
  const Index J = c.J();
  const Index K = c.K();
  require(u.rows() == J + 1 && u.cols() == K + 1 && w.rows() == J + 1 && w.cols() == K + 1,
          "field shape does not match the mesh");
  const AxisMesh& x = c.x;
  const AxisMesh& y = c.y;
  const RealVector wx = node_weights(x, InnerProductKind::closed);
  const RealVector wy = node_weights(y, InnerProductKind::interior);
  Complex sum = 0.0;
  for (Index j = 1; j <= J; ++j)
    for (Index k = 1; k < K; ++k) {
      const Real h = x.step(j);
      sum += c.b11h(j, k) * (u(j, k) - u(j - 1, k)) * std::conj(w(j, k) - w(j - 1, k)) / h * wy(k);
    }
  for (Index j = 1; j <= J; ++j)
    for (Index k = 1; k <= K; ++k) {
      const Real d = y.step(k);
      sum += c.b22h(j, k) * (u(j, k) - u(j, k - 1)) * std::conj(w(j, k) - w(j, k - 1)) / d * wx(j);
    }
  if (c.has_cross_terms) {
    auto sx_dy = [&](const Field& f, Index j, Index k) {
      return 0.5 * ((f(j - 1, k) - f(j - 1, k - 1)) + (f(j, k) - f(j, k - 1))) / y.step(k);
    };
    auto dx_sy = [&](const Field& f, Index j, Index k) {
      return 0.5 * ((f(j, k - 1) + f(j, k)) - (f(j - 1, k - 1) + f(j - 1, k))) / x.step(j);
    };
    for (Index j = 1; j <= J; ++j)
      for (Index k = 1; k <= K; ++k) {
        const Real area = x.step(j) * y.step(k);
        sum += c.b12h(j, k) * area *
               (sx_dy(u, j, k) * std::conj(dx_sy(w, j, k)) + dx_sy(u, j, k) * std::conj(sx_dy(w, j, k)));
      }
  }
  sum *= 0.5 * c.hbar * c.hbar;
  const RealGrid& v = potential ? *potential : c.v_h;
  for (Index j = 0; j <= J; ++j)
    for (Index k = 1; k < K; ++k) sum += v(j, k) * u(j, k) * std::conj(w(j, k)) * wx(j) * wy(k);
  return sum;
}

}  // namespace qstrip
