#pragma once

// Modified inflow conditions: the reflection-correction coefficients
// m1/m2, the corrected fourth left row, and the corrected tangential
// tables. Only the inflow is modified; the outflow keeps the quasi-3D
// operator.

#include "curvibc/bc_quasi3d.hpp"
#include "curvibc/core.hpp"
#include "curvibc/eigenvectors.hpp"

namespace curvibc {

struct ModCoefficients {
  real m1 = 0, m2 = 0;
  real A1 = 0, A2 = 0, A3 = 0;  // quadratic reflection coefficients
};

// Which formula path produced the coefficients.
enum class MPath { automatic, raw, limit_form };

namespace detail {

inline bool axis_aligned(const Metric& m, const MetricNorms& n, real tol) {
  return std::abs(m.xi_y) <= tol * n.norm_xi && std::abs(m.xi_z) <= tol * n.norm_xi &&
         std::abs(m.eta_x) <= tol * n.norm_eta && std::abs(m.eta_z) <= tol * n.norm_eta &&
         std::abs(m.zeta_x) <= tol * n.norm_zeta && std::abs(m.zeta_y) <= tol * n.norm_zeta;
}

}  // namespace detail

// m1/m2 chosen to cancel the pure-quadratic reflection coefficients. The
// denominators are cross products of the boundary-plane metric pairs;
// when one degenerates the direct formula blows up, and only metrics that
// are axis-aligned (to 1e-10) keep a well-defined limit value. A1 and A3
// vanish by construction; A2 is computed and reported, never assumed
// small.
inline ModCoefficients compute_m(const Metric& m, const MeanFlow& flow,
                                 MPath path = MPath::automatic) {
  m.validate();
  MeanFlow nd = nondimensionalize(flow);
  MetricNorms n = compute_norms(m);
  ContravariantFlow cv = contravariant(m, nd);
  const real half_speed = 0.5 * (cv.U + n.norm_xi);
  const real num1 = half_speed * sq(n.norm_eta);
  const real num2 = half_speed * sq(n.norm_zeta);
  const real d1 = m.xi_y * m.eta_x - m.xi_x * m.eta_y;
  const real d2 = m.xi_z * m.zeta_x - m.xi_x * m.zeta_z;
  const bool d1_ok = std::abs(d1) > 1e-10 * n.norm_xi * n.norm_eta;
  const bool d2_ok = std::abs(d2) > 1e-10 * n.norm_xi * n.norm_zeta;

  ModCoefficients c;
  bool use_raw = (path == MPath::raw) || (path == MPath::automatic && d1_ok && d2_ok);
  if (use_raw) {
    require(d1_ok && d2_ok, "DegenerateDenominator",
            "m1/m2 denominators vanish for this metric");
    c.m1 = num1 / d1;
    c.m2 = num2 / d2;
  } else {
    require(detail::axis_aligned(m, n, 1e-10), "DegenerateDenominator",
            "limit form only defined near axis-aligned metrics");
    c.m1 = -num1 / (m.xi_x * m.eta_y);
    c.m2 = -num2 / (m.xi_x * m.zeta_z);
  }

  c.A1 = -num1 + c.m1 * d1;
  c.A2 = c.m1 * (m.xi_y * m.zeta_x - m.xi_x * m.zeta_y) +
         c.m2 * (m.xi_z * m.eta_x - m.xi_x * m.eta_z);
  c.A3 = -num2 + c.m2 * d2;
  return c;
}

// Corrected fourth left row: the truncated quasi-3D row plus the
// lambda-weighted vorticity rows, which cancel the pure-quadratic part
// of the reflection product against the upstream acoustic mode.
inline CVec5 modified_v4(const Metric& m, const MeanFlow& flow,
                         const LambdaPair& lp, MPath path = MPath::automatic) {
  ModCoefficients c = compute_m(m, flow, path);
  MeanFlow nd = nondimensionalize(flow);
  TaylorVLeft t = taylor_v_left(4, m, nd);
  LimitVectors w = limit_vectors(m, nd);
  CVec5 v;
  for (int j = 0; j < 5; ++j)
    v(j, 0) = cplx(t.value(j, 0)) + lp.lambda1 * t.d_lambda1(j, 0) +
              lp.lambda2 * t.d_lambda2(j, 0) + lp.lambda1 * c.m1 * w.left[1](j, 0) +
              lp.lambda2 * c.m2 * w.left[2](j, 0);
  return v;
}

// Modified inflow operator: the quasi-3D tables with the m1/m2
// injections in the fourth tangential rows.
inline BCOperator build_modified(const Metric& m, const MeanFlow& flow,
                                 Basis basis = Basis::primitive,
                                 UnitMode mode = UnitMode::nondimensional,
                                 MPath path = MPath::automatic,
                                 H44Reading h44 = H44Reading::xi_zeta) {
  ModCoefficients c = compute_m(m, flow, path);
  return detail::assemble_operator(m, flow, Side::inflow, basis, mode, h44, c.m1,
                                   c.m2, Variant::modified);
}

}  // namespace curvibc
