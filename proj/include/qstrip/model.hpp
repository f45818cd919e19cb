#pragma once

#include <array>
#include <functional>
#include <limits>

#include "qstrip/common.hpp"
#include "qstrip/mesh.hpp"

namespace qstrip {

using CoefficientFn = std::function<Real(Real x, Real y)>;
using ProfileFn = std::function<Real(Real x)>;

/// Constant values the coefficients take outside the inner region.
struct Asymptotics {
  Real rho = 1.0;
  Real b1 = 1.0;
  Real b2 = 1.0;
  Real v = 0.0;
};

/// Coefficients of  i hbar rho D_t psi = (H_0 + V) psi  on the strip (0, Y).
///
/// B is symmetric, so a single off-diagonal entry b12 stands for B12 = B21.
/// For x >= x0_right (and x <= x0_left on an infinite strip) every coefficient
/// must equal its asymptotic constant and v_tilde must equal asymptotics.v.
struct PhysicalModel {
  Real hbar = 1.0;
  CoefficientFn rho;
  CoefficientFn b11;
  CoefficientFn b12;
  CoefficientFn b22;
  CoefficientFn v;
  ProfileFn v_tilde;
  Asymptotics asymptotics;
  Real x0_right = 0.0;
  Real x0_left = -std::numeric_limits<Real>::infinity();

  /// Constant rho, diagonal constant B, V = V_tilde = v_inf everywhere.
  static PhysicalModel homogeneous(Real hbar, const Asymptotics& asymptotics);
};

/// Open rectangle (a, b) x (c, d) carrying potential height q.
struct Barrier {
  Real a = 0.0;
  Real b = 0.0;
  Real c = 0.0;
  Real d = 0.0;
  Real q = 0.0;
};

/// V = q on the open rectangle, 0 elsewhere. Rejects rectangles that do not lie
/// in [0, x_extent] x [0, y_extent] and negative heights.
CoefficientFn barrier_potential(const Barrier& barrier, Real x_extent, Real y_extent);
/// q * indicator of (a, b) in x; the barrier-slab choice of the auxiliary potential.
ProfileFn barrier_slab(const Barrier& barrier);

/// Mesh coefficients: midpoint samples A_{-,jk} = A(x_{j-1/2}, y_{k-1/2})
/// followed by the hat-averagings.
///
/// Layouts (rows = x index, cols = y index):
///   b11h      x-cell j in [0, J+1], y-node k in [0, K]     (hat-s_y B11_-)
///   b22h      x-node j in [0, J],   y-cell k in [0, K+1]   (hat-s_x B22_-)
///   b12h      x-cell j in [0, J+1], y-cell k in [0, K+1]   (B12_-)
///   rho_h, v_h, delta_v_h   nodes (J+1) x (K+1)
///   v_tilde_h               nodes j in [0, J]              (hat-s_x V_tilde_-)
struct SampledCoefficients {
  AxisMesh x;
  AxisMesh y;
  Real hbar = 1.0;
  Asymptotics asymptotics;
  RealGrid b11h;
  RealGrid b22h;
  RealGrid b12h;
  RealGrid rho_h;
  RealGrid v_h;
  RealVector v_tilde_h;
  RealGrid delta_v_h;
  bool has_cross_terms = false;

  Index J() const { return x.intervals(); }
  Index K() const { return y.intervals(); }
};

SampledCoefficients sample_coefficients(const PhysicalModel& model, const AxisMesh& x, const AxisMesh& y);

enum class PropagatorVariant { cayley, exponential };

/// Pointwise unit-modulus potential kick for half a time step.
struct CayleyPropagator {
  Field values;
  PropagatorVariant variant = PropagatorVariant::cayley;
  Real tau = 0.0;
};

CayleyPropagator build_propagator(const SampledCoefficients& coeffs, Real tau,
                                  PropagatorVariant variant = PropagatorVariant::cayley);

enum class StripKind { semi_infinite, infinite };

struct GaussianPacket {
  Real k = 30.0;
  Real alpha = 1.0 / 120.0;
  Real x0 = 1.0;
  Real y0 = 1.4;
};

/// Samples exp{i sqrt(2) k (x - x0) - ((x - x0)^2 + (y - y0)^2) / (4 alpha)} at
/// the nodes, then hard-zeroes k = 0, K, the two rightmost columns j = J-1, J,
/// and on the semi-infinite strip j = 0 (on the infinite strip j = 0, 1).
Field gaussian_packet(const AxisMesh& x, const AxisMesh& y, const GaussianPacket& packet,
                      StripKind strip = StripKind::semi_infinite);

/// The 2D mesh Hamiltonian H_0h applied at interior nodes j = 1..J-1, k = 1..K-1;
/// all other entries of the result are zero. W is read on the whole grid.
Field apply_hamiltonian(const SampledCoefficients& coeffs, const Field& w);

/// Coefficients of H_0h at node (j, k) as a 3x3 stencil indexed [dj+1][dk+1].
/// Valid for 1 <= j <= J-1 (or any j whose neighbours exist on an extended mesh)
/// and 1 <= k <= K-1.
using Stencil = std::array<std::array<Complex, 3>, 3>;
Stencil hamiltonian_stencil(const SampledCoefficients& coeffs, Index j, Index k);

}  // namespace qstrip
