#include "qstrip/model.hpp"

#include <cmath>

namespace qstrip {

PhysicalModel PhysicalModel::homogeneous(Real hbar, const Asymptotics& a) {
  PhysicalModel m;
  m.hbar = hbar;
  m.asymptotics = a;
  m.rho = [r = a.rho](Real, Real) { return r; };
  m.b11 = [b = a.b1](Real, Real) { return b; };
  m.b12 = [](Real, Real) { return 0.0; };
  m.b22 = [b = a.b2](Real, Real) { return b; };
  m.v = [v = a.v](Real, Real) { return v; };
  m.v_tilde = [v = a.v](Real) { return v; };
  m.x0_right = 0.0;
  return m;
}

CoefficientFn barrier_potential(const Barrier& r, Real x_extent, Real y_extent) {
  require(r.q >= 0.0, "barrier height must be non-negative");
  require(r.a < r.b && r.c < r.d, "barrier rectangle is empty");
  require(r.a >= 0.0 && r.b <= x_extent && r.c >= 0.0 && r.d <= y_extent,
          "barrier rectangle lies outside the computational domain");
  return [r](Real x, Real y) { return (x > r.a && x < r.b && y > r.c && y < r.d) ? r.q : 0.0; };
}

ProfileFn barrier_slab(const Barrier& r) {
  return [r](Real x) { return (x > r.a && x < r.b) ? r.q : 0.0; };
}

namespace {

/// (hl al + hr ar) / (hl + hr); returns al exactly when both samples agree so
/// that constant coefficients survive the averaging bit-for-bit.
Real hat_avg(Real hl, Real al, Real hr, Real ar) {
  if (al == ar) return al;
  return (hl * al + hr * ar) / (hl + hr);
}

Real eval_checked(const CoefficientFn& f, Real x, Real y, const char* name) {
  const Real v = f(x, y);
  if (!std::isfinite(v))
    throw ValidationError(std::string("coefficient ") + name + " is not finite at (" + std::to_string(x) +
                          ", " + std::to_string(y) + ")");
  return v;
}

RealGrid sample_cells(const CoefficientFn& f, const AxisMesh& x, const AxisMesh& y, const char* name) {
  const Index J = x.intervals();
  const Index K = y.intervals();
  RealGrid a(J + 2, K + 2);
  for (Index j = 0; j <= J + 1; ++j)
    for (Index k = 0; k <= K + 1; ++k) a(j, k) = eval_checked(f, x.midpoint(j), y.midpoint(k), name);
  return a;
}

void check_asymptotic(const RealGrid& cells, Real value, const AxisMesh& x, const PhysicalModel& model,
                      const char* name) {
  for (Index j = 0; j < cells.rows(); ++j) {
    const Real xm = x.midpoint(j);
    if (xm < model.x0_right && xm > model.x0_left) continue;
    for (Index k = 0; k < cells.cols(); ++k)
      if (cells(j, k) != value)
        throw ValidationError(std::string("coefficient ") + name +
                              " differs from its asymptotic constant outside [x0_left, x0_right]");
  }
}

}  // namespace

SampledCoefficients sample_coefficients(const PhysicalModel& model, const AxisMesh& x, const AxisMesh& y) {
  require(model.hbar > 0.0, "hbar must be positive");
  require(model.rho && model.b11 && model.b12 && model.b22 && model.v && model.v_tilde,
          "physical model has unset coefficient functions");
  const Asymptotics& inf = model.asymptotics;
  require(inf.rho > 0.0 && inf.b1 > 0.0 && inf.b2 > 0.0, "asymptotic rho, B1, B2 must be positive");

  const Index J = x.intervals();
  const Index K = y.intervals();

  const RealGrid rho_c = sample_cells(model.rho, x, y, "rho");
  const RealGrid b11_c = sample_cells(model.b11, x, y, "B11");
  const RealGrid b12_c = sample_cells(model.b12, x, y, "B12");
  const RealGrid b22_c = sample_cells(model.b22, x, y, "B22");
  const RealGrid v_c = sample_cells(model.v, x, y, "V");

  check_asymptotic(rho_c, inf.rho, x, model, "rho");
  check_asymptotic(b11_c, inf.b1, x, model, "B11");
  check_asymptotic(b12_c, 0.0, x, model, "B12");
  check_asymptotic(b22_c, inf.b2, x, model, "B22");
  check_asymptotic(v_c, inf.v, x, model, "V");

  for (Index j = 0; j <= J + 1; ++j)
    for (Index k = 0; k <= K + 1; ++k) {
      if (!(rho_c(j, k) > 0.0)) throw ValidationError("sampled rho is not positive");
      const Real det = b11_c(j, k) * b22_c(j, k) - b12_c(j, k) * b12_c(j, k);
      if (!(b11_c(j, k) > 0.0) || !(det > 0.0)) throw ValidationError("sampled B is not positive definite");
    }

  SampledCoefficients s;
  s.x = x;
  s.y = y;
  s.hbar = model.hbar;
  s.asymptotics = inf;

  s.b11h.resize(J + 2, K + 1);
  for (Index j = 0; j <= J + 1; ++j)
    for (Index k = 0; k <= K; ++k)
      s.b11h(j, k) = hat_avg(y.step(k), b11_c(j, k), y.step(k + 1), b11_c(j, k + 1));

  s.b22h.resize(J + 1, K + 2);
  for (Index j = 0; j <= J; ++j)
    for (Index k = 0; k <= K + 1; ++k)
      s.b22h(j, k) = hat_avg(x.step(j), b22_c(j, k), x.step(j + 1), b22_c(j + 1, k));

  s.b12h = b12_c;
  s.has_cross_terms = (b12_c != 0.0).any();

  auto hat_xy = [&](const RealGrid& c) {
    RealGrid out(J + 1, K + 1);
    for (Index j = 0; j <= J; ++j)
      for (Index k = 0; k <= K; ++k) {
        const Real lower = hat_avg(y.step(k), c(j, k), y.step(k + 1), c(j, k + 1));
        const Real upper = hat_avg(y.step(k), c(j + 1, k), y.step(k + 1), c(j + 1, k + 1));
        out(j, k) = hat_avg(x.step(j), lower, x.step(j + 1), upper);
      }
    return out;
  };
  s.rho_h = hat_xy(rho_c);
  s.v_h = hat_xy(v_c);

  s.v_tilde_h.resize(J + 1);
  for (Index j = 0; j <= J; ++j) {
    const Real l = model.v_tilde(x.midpoint(j));
    const Real r = model.v_tilde(x.midpoint(j + 1));
    if (!std::isfinite(l) || !std::isfinite(r)) throw ValidationError("auxiliary potential is not finite");
    for (Index jj : {j, j + 1}) {
      const Real xm = x.midpoint(jj);
      if ((xm >= model.x0_right || xm <= model.x0_left) && model.v_tilde(xm) != inf.v)
        throw ValidationError("auxiliary potential differs from V_inf outside [x0_left, x0_right]");
    }
    s.v_tilde_h(j) = hat_avg(x.step(j), l, x.step(j + 1), r);
  }

  s.delta_v_h.resize(J + 1, K + 1);
  for (Index j = 0; j <= J; ++j)
    for (Index k = 0; k <= K; ++k) s.delta_v_h(j, k) = s.v_h(j, k) - s.v_tilde_h(j);

  return s;
}

CayleyPropagator build_propagator(const SampledCoefficients& coeffs, Real tau, PropagatorVariant variant) {
  require(tau > 0.0, "propagator time step must be positive");
  CayleyPropagator p;
  p.variant = variant;
  p.tau = tau;
  p.values.resize(coeffs.rho_h.rows(), coeffs.rho_h.cols());
  for (Index j = 0; j < p.values.rows(); ++j)
    for (Index k = 0; k < p.values.cols(); ++k) {
      const Real dv = coeffs.delta_v_h(j, k);
      if (dv == 0.0) {
        p.values(j, k) = 1.0;
        continue;
      }
      if (variant == PropagatorVariant::cayley) {
        const Real theta = tau * dv / (4.0 * coeffs.hbar * coeffs.rho_h(j, k));
        p.values(j, k) = Complex(1.0, -theta) / Complex(1.0, theta);
      } else {
        const Real phase = -tau * dv / (2.0 * coeffs.hbar * coeffs.rho_h(j, k));
        p.values(j, k) = std::polar(1.0, phase);
      }
    }
  return p;
}

Field gaussian_packet(const AxisMesh& x, const AxisMesh& y, const GaussianPacket& g, StripKind strip) {
  require(g.alpha > 0.0, "packet width alpha must be positive");
  const Index J = x.intervals();
  const Index K = y.intervals();
  Field psi = Field::Zero(J + 1, K + 1);
  const Real kx = std::sqrt(2.0) * g.k;
  for (Index j = 0; j <= J; ++j) {
    const Real dx = x.node(j) - g.x0;
    for (Index k = 1; k < K; ++k) {
      const Real dy = y.node(k) - g.y0;
      psi(j, k) = std::exp(Complex(-(dx * dx + dy * dy) / (4.0 * g.alpha), kx * dx));
    }
  }
  psi.row(J).setZero();
  psi.row(J - 1).setZero();
  psi.row(0).setZero();
  if (strip == StripKind::infinite) psi.row(1).setZero();
  return psi;
}

namespace {

/// H_0h at (j, k) for a field given through an accessor w(jj, kk).
template <typename Access>
Complex hamiltonian_at(const SampledCoefficients& c, Index j, Index k, const Access& w) {
  const AxisMesh& x = c.x;
  const AxisMesh& y = c.y;
  const Real hj = x.step(j), hp = x.step(j + 1), hh = x.half_step(j);
  const Real dk = y.step(k), dp = y.step(k + 1), dh = y.half_step(k);

  const Complex t1 =
      (c.b11h(j + 1, k) * (w(j + 1, k) - w(j, k)) / hp - c.b11h(j, k) * (w(j, k) - w(j - 1, k)) / hj) / hh;
  const Complex t4 =
      (c.b22h(j, k + 1) * (w(j, k + 1) - w(j, k)) / dp - c.b22h(j, k) * (w(j, k) - w(j, k - 1)) / dk) / dh;

  Complex t2 = 0.0, t3 = 0.0;
  if (c.has_cross_terms) {
    // B12 s_x d_y W on cell (jj, kk)
    auto g = [&](Index jj, Index kk) {
      const Real d = y.step(kk);
      return c.b12h(jj, kk) * 0.5 * ((w(jj - 1, kk) - w(jj - 1, kk - 1)) + (w(jj, kk) - w(jj, kk - 1))) / d;
    };
    auto sy_g = [&](Index jj) { return (dk * g(jj, k) + dp * g(jj, k + 1)) / (2.0 * dh); };
    t2 = (sy_g(j + 1) - sy_g(j)) / hh;

    // B21 d_x s_y W on cell (jj, kk)
    auto g2 = [&](Index jj, Index kk) {
      const Real h = x.step(jj);
      return c.b12h(jj, kk) * 0.5 * ((w(jj, kk - 1) + w(jj, kk)) - (w(jj - 1, kk - 1) + w(jj - 1, kk))) / h;
    };
    auto dy_g2 = [&](Index jj) { return (g2(jj, k + 1) - g2(jj, k)) / dh; };
    t3 = (hj * dy_g2(j) + hp * dy_g2(j + 1)) / (2.0 * hh);
  }
  return -0.5 * c.hbar * c.hbar * (t1 + t2 + t3 + t4);
}

}  // namespace

Field apply_hamiltonian(const SampledCoefficients& c, const Field& w) {
  const Index J = c.J();
  const Index K = c.K();
  if (w.rows() != J + 1 || w.cols() != K + 1) throw ValidationError("field shape does not match the mesh");
  Field out = Field::Zero(J + 1, K + 1);
  auto access = [&w](Index jj, Index kk) -> Complex { return w(jj, kk); };
  for (Index j = 1; j < J; ++j)
    for (Index k = 1; k < K; ++k) out(j, k) = hamiltonian_at(c, j, k, access);
  return out;
}

Stencil hamiltonian_stencil(const SampledCoefficients& c, Index j, Index k) {
  if (j < 1 || j > c.J() || k < 1 || k > c.K() - 1) throw ValidationError("stencil node out of range");
  Stencil s{};
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      auto delta = [=](Index jj, Index kk) -> Complex { return (jj == j + a && kk == k + b) ? 1.0 : 0.0; };
      s[static_cast<std::size_t>(a + 1)][static_cast<std::size_t>(b + 1)] = hamiltonian_at(c, j, k, delta);
    }
  return s;
}

}  // namespace qstrip
