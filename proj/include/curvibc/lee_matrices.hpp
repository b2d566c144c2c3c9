#pragma once

// Linearized-Euler flux matrices in Cartesian and curvilinear form, and
// the Fourier-space matrix whose kernel carries the wave modes. The state
// ordering is (rho', u', v', w', p') throughout.

#include "curvibc/core.hpp"
#include "curvibc/linalg.hpp"
#include "curvibc/metrics.hpp"

namespace curvibc {

struct FluxTriple {
  Mat5 A, B, C;
};

// Cartesian matrices for the nondimensional state (rho_bar = c_bar = 1):
// mean velocity on the diagonal, unit pressure/velocity couplings.
inline FluxTriple build_cartesian(const MeanFlow& flow) {
  flow.validate();
  require(flow.is_nondimensional(), "DimensionalModeUnsupported",
          "Cartesian flux matrices assume the nondimensional state");
  FluxTriple t;
  for (int i = 0; i < 5; ++i) {
    t.A(i, i) = flow.u_bar;
    t.B(i, i) = flow.v_bar;
    t.C(i, i) = flow.w_bar;
  }
  t.A(0, 1) = 1; t.A(1, 4) = 1; t.A(4, 1) = 1;
  t.B(0, 2) = 1; t.B(2, 4) = 1; t.B(4, 2) = 1;
  t.C(0, 3) = 1; t.C(3, 4) = 1; t.C(4, 3) = 1;
  return t;
}

namespace detail {

// closed form: contravariant velocity on the diagonal, the metric row in
// row 1 and column 5, mirrored into row 5
inline Mat5 curvilinear_closed(real gx, real gy, real gz, real Uc) {
  Mat5 m;
  for (int i = 0; i < 5; ++i) m(i, i) = Uc;
  m(0, 1) = gx; m(0, 2) = gy; m(0, 3) = gz;
  m(1, 4) = gx; m(2, 4) = gy; m(3, 4) = gz;
  m(4, 1) = gx; m(4, 2) = gy; m(4, 3) = gz;
  return m;
}

}  // namespace detail

// Curvilinear matrices, built two ways and cross-checked: the closed
// entrywise form and the metric-weighted combination of the Cartesian
// triple. A mismatch signals a coding fault, not bad input.
inline FluxTriple build_curvilinear(const Metric& m, const MeanFlow& flow) {
  m.validate();
  FluxTriple cart = build_cartesian(flow);
  ContravariantFlow cv = contravariant(m, flow);

  FluxTriple t;
  t.A = detail::curvilinear_closed(m.xi_x, m.xi_y, m.xi_z, cv.U);
  t.B = detail::curvilinear_closed(m.eta_x, m.eta_y, m.eta_z, cv.V);
  t.C = detail::curvilinear_closed(m.zeta_x, m.zeta_y, m.zeta_z, cv.W);

  Mat5 a2 = m.xi_x * cart.A + m.xi_y * cart.B + m.xi_z * cart.C;
  Mat5 b2 = m.eta_x * cart.A + m.eta_y * cart.B + m.eta_z * cart.C;
  Mat5 c2 = m.zeta_x * cart.A + m.zeta_y * cart.B + m.zeta_z * cart.C;

  real scale = std::max({max_abs(t.A), max_abs(t.B), max_abs(t.C), 1.0});
  real dev = std::max({max_abs(t.A - a2), max_abs(t.B - b2), max_abs(t.C - c2)});
  require(dev <= 1e-14 * scale, "InternalInconsistency",
          "curvilinear flux matrices: closed form vs linear combination");
  return t;
}

struct WaveVector {
  cplx k, l, m, omega;
};

// -omega*I + k*At + l*Bt + m*Ct has a fixed 13-entry pattern governed by
// the phase speed beta and the metric-contracted wavenumbers alpha.
struct DispersionMatrix {
  CMat5 M;
  cplx beta, alpha1, alpha2, alpha3;
};

inline DispersionMatrix dispersion_matrix(const Metric& m, const MeanFlow& flow,
                                          const WaveVector& w) {
  ContravariantFlow cv = contravariant(m, flow);
  DispersionMatrix d;
  d.beta = cv.U * w.k + cv.V * w.l + cv.W * w.m - w.omega;
  d.alpha1 = m.xi_x * w.k + m.eta_x * w.l + m.zeta_x * w.m;
  d.alpha2 = m.xi_y * w.k + m.eta_y * w.l + m.zeta_y * w.m;
  d.alpha3 = m.xi_z * w.k + m.eta_z * w.l + m.zeta_z * w.m;
  for (int i = 0; i < 5; ++i) d.M(i, i) = d.beta;
  d.M(0, 1) = d.alpha1; d.M(0, 2) = d.alpha2; d.M(0, 3) = d.alpha3;
  d.M(1, 4) = d.alpha1; d.M(2, 4) = d.alpha2; d.M(3, 4) = d.alpha3;
  d.M(4, 1) = d.alpha1; d.M(4, 2) = d.alpha2; d.M(4, 3) = d.alpha3;
  return d;
}

// Factored determinant of the dispersion matrix. Equals det(M); the
// acoustic bracket carries roots 4 and 5, the cubed factor the convected
// triple root.
inline cplx dispersion_determinant(const DispersionMatrix& d) {
  cplx alpha_sq = d.alpha1 * d.alpha1 + d.alpha2 * d.alpha2 + d.alpha3 * d.alpha3;
  return d.beta * d.beta * d.beta * (d.beta * d.beta - alpha_sq);
}

}  // namespace curvibc
