#pragma once

// Second-order (quasi-3D) boundary operators: Taylor expansion of the
// v_n^L rows in the tangential-wavenumber ratios, the tangential
// coefficient tables G and H, and residual evaluation in primitive or
// characteristic variables.

#include <array>

#include "curvibc/characteristics.hpp"
#include "curvibc/core.hpp"
#include "curvibc/eigenvectors.hpp"
#include "curvibc/metrics.hpp"

namespace curvibc {

enum class Side { inflow, outflow };
enum class Basis { primitive, characteristic };
enum class Variant { first_order, quasi3d, modified };

// The published characteristic-form table carries |xi.eta| in the h44
// entry where every symmetry of the construction calls for |xi.zeta|;
// both readings are available, the consistent one is the default.
enum class H44Reading { xi_zeta, xi_eta };

// Taylor data of one v_n^L row about lambda = 0: the value row and the
// two first-derivative rows. All real at the expansion point.
struct TaylorVLeft {
  Vec5 value, d_lambda1, d_lambda2;
};

inline MeanFlow nondimensionalize(const MeanFlow& f) {
  MeanFlow nd;
  nd.u_bar = f.u_bar / f.c_bar;
  nd.v_bar = f.v_bar / f.c_bar;
  nd.w_bar = f.w_bar / f.c_bar;
  nd.p_bar = f.p_bar / (f.rho_bar * f.c_bar * f.c_bar);
  return nd;
}

namespace detail {

// d(k*_n)/d(lambda) at lambda = 0 by the chain rule through S*. The
// lambda-derivative of the radicand collapses to a single metric term.
inline std::pair<real, real> dk_star0(int n, const MetricNorms& nm,
                                      const ContravariantFlow& cv) {
  const real U = cv.U, xn = nm.norm_xi;
  const real D = xn * xn - U * U;
  const real S0 = xn / U;
  auto one = [&](real dotx, real Vt) {
    real dN = dotx - U * Vt;
    real dS = -D * dotx / (U * U * xn);
    if (n == 4) return (dN * (-1 + S0) + U * dS) / D;
    return (dN * (-1 - S0) - U * dS) / D;
  };
  return {one(nm.dot_xieta, cv.V), one(nm.dot_xizeta, cv.W)};
}

}  // namespace detail

// Value and lambda-derivatives of v_n^L at lambda = 0. Every entry of the
// closed forms is affine in lambda except through k*_4 and k*_5, whose
// derivatives come from the chain rule above; a finite-difference oracle
// in the test suite guards the algebra.
inline TaylorVLeft taylor_v_left(int n, const Metric& m, const MeanFlow& flow) {
  require(n >= 1 && n <= 5, "BadModeIndex", "mode index must be 1..5");
  MetricNorms nm = compute_norms(m);
  detail::check_psi(n, nm);
  ContravariantFlow cv = contravariant(m, flow);
  const real U = cv.U, V = cv.V, W = cv.W, xn = nm.norm_xi;
  if (n <= 3)
    require(std::abs(U) > 1e-13 * xn * std::max(flow.c_bar, 1.0),
            "CriticalStreamwise", "Taylor rows of convected modes need U != 0");

  TaylorVLeft t{};
  switch (n) {
    case 1:
      t.value(0, 0) = -xn;
      t.value(4, 0) = xn;
      break;
    case 2:
      t.value(1, 0) = -m.xi_y;
      t.value(2, 0) = m.xi_x;
      t.d_lambda1(1, 0) = V * m.xi_y - U * m.eta_y;
      t.d_lambda1(2, 0) = U * m.eta_x - V * m.xi_x;
      t.d_lambda1(4, 0) = m.xi_y * m.eta_x - m.xi_x * m.eta_y;
      t.d_lambda2(1, 0) = W * m.xi_y - U * m.zeta_y;
      t.d_lambda2(2, 0) = U * m.zeta_x - W * m.xi_x;
      t.d_lambda2(4, 0) = m.xi_y * m.zeta_x - m.xi_x * m.zeta_y;
      break;
    case 3:
      t.value(1, 0) = -m.xi_z;
      t.value(3, 0) = m.xi_x;
      t.d_lambda1(1, 0) = V * m.xi_z - U * m.eta_z;
      t.d_lambda1(3, 0) = U * m.eta_x - V * m.xi_x;
      t.d_lambda1(4, 0) = m.xi_z * m.eta_x - m.xi_x * m.eta_z;
      t.d_lambda2(1, 0) = W * m.xi_z - U * m.zeta_z;
      t.d_lambda2(3, 0) = U * m.zeta_x - W * m.xi_x;
      t.d_lambda2(4, 0) = m.xi_z * m.zeta_x - m.xi_x * m.zeta_z;
      break;
    case 4:
    case 5: {
      require(std::abs(xn * xn - U * U) > 1e-13 * xn * xn, "SonicDegenerate",
              "acoustic Taylor rows degenerate at |xi| = |U|");
      const real sgn = (n == 4) ? 1.0 : -1.0;
      const real D = xn * xn - U * U;
      auto [dk1, dk2] = detail::dk_star0(n, nm, cv);
      t.value(1, 0) = sgn * m.xi_x;
      t.value(2, 0) = sgn * m.xi_y;
      t.value(3, 0) = sgn * m.xi_z;
      t.value(4, 0) = xn;  // U + (lim k*) D collapses to |xi| for both signs
      t.d_lambda1(1, 0) = sgn * (U * m.eta_x - V * m.xi_x);
      t.d_lambda1(2, 0) = sgn * (U * m.eta_y - V * m.xi_y);
      t.d_lambda1(3, 0) = sgn * (U * m.eta_z - V * m.xi_z);
      t.d_lambda1(4, 0) = sgn * (dk1 * D + nm.dot_xieta - U * V);
      t.d_lambda2(1, 0) = sgn * (U * m.zeta_x - W * m.xi_x);
      t.d_lambda2(2, 0) = sgn * (U * m.zeta_y - W * m.xi_y);
      t.d_lambda2(3, 0) = sgn * (U * m.zeta_z - W * m.xi_z);
      t.d_lambda2(4, 0) = sgn * (dk2 * D + nm.dot_xizeta - U * W);
      break;
    }
  }
  return t;
}

// Assembled boundary operator: r residual rows of the form
//   time_rows * Q_t + G * Q_eta + H * Q_zeta = 0
// with r = 4 at the inflow and r = 1 at the outflow.
struct BCOperator {
  int r = 4;
  std::array<Vec5, 4> time_rows{}, G{}, H{};
  Side side = Side::inflow;
  Basis basis = Basis::primitive;
  Variant variant = Variant::quasi3d;
  UnitMode mode = UnitMode::nondimensional;
  H44Reading h44 = H44Reading::xi_zeta;
};

namespace detail {

// nondimensional tangential tables in closed form; rows 1..5 of the eta
// table (G) and zeta table (H)
inline void closed_tables(const Metric& m, const ContravariantFlow& cv,
                          const MetricNorms& nm, std::array<Vec5, 5>& G,
                          std::array<Vec5, 5>& H) {
  const real U = cv.U, V = cv.V, W = cv.W, xn = nm.norm_xi;
  G = {};
  H = {};
  // eta table
  G[1](1, 0) = U * m.eta_y - V * m.xi_y;
  G[1](2, 0) = -U * m.eta_x + V * m.xi_x;
  G[1](4, 0) = m.xi_x * m.eta_y - m.xi_y * m.eta_x;
  G[2](1, 0) = U * m.eta_z - V * m.xi_z;
  G[2](3, 0) = -U * m.eta_x + V * m.xi_x;
  G[2](4, 0) = m.xi_x * m.eta_z - m.xi_z * m.eta_x;
  G[3](1, 0) = -U * m.eta_x + V * m.xi_x;
  G[3](2, 0) = -U * m.eta_y + V * m.xi_y;
  G[3](3, 0) = -U * m.eta_z + V * m.xi_z;
  G[3](4, 0) = -U * nm.dot_xieta / xn + V * xn;
  G[4](1, 0) = U * m.eta_x - V * m.xi_x;
  G[4](2, 0) = U * m.eta_y - V * m.xi_y;
  G[4](3, 0) = U * m.eta_z - V * m.xi_z;
  G[4](4, 0) = -U * nm.dot_xieta / xn + V * xn;
  // zeta table
  H[1](1, 0) = U * m.zeta_y - W * m.xi_y;
  H[1](2, 0) = -U * m.zeta_x + W * m.xi_x;
  H[1](4, 0) = m.xi_x * m.zeta_y - m.xi_y * m.zeta_x;
  H[2](1, 0) = U * m.zeta_z - W * m.xi_z;
  H[2](3, 0) = -U * m.zeta_x + W * m.xi_x;
  H[2](4, 0) = m.xi_x * m.zeta_z - m.xi_z * m.zeta_x;
  H[3](1, 0) = -U * m.zeta_x + W * m.xi_x;
  H[3](2, 0) = -U * m.zeta_y + W * m.xi_y;
  H[3](3, 0) = -U * m.zeta_z + W * m.xi_z;
  H[3](4, 0) = -U * nm.dot_xizeta / xn + W * xn;
  H[4](1, 0) = U * m.zeta_x - W * m.xi_x;
  H[4](2, 0) = U * m.zeta_y - W * m.xi_y;
  H[4](3, 0) = U * m.zeta_z - W * m.xi_z;
  H[4](4, 0) = -U * nm.dot_xizeta / xn + W * xn;
}

// characteristic-form closed tables (velocities and sound speed in the
// caller's units); h44_xi_eta selects the published reading of that entry
inline void closed_tables_char(const Metric& m, real U, real V, real W, real cbar,
                               const MetricNorms& nm, bool h44_xi_eta,
                               std::array<Vec5, 5>& G, std::array<Vec5, 5>& H) {
  const real xn = nm.norm_xi, p2 = sq(nm.psi2), p3 = sq(nm.psi3);
  const real xn2 = xn * xn;
  G = {};
  H = {};
  G[1](1, 0) = -(U / p2) * (m.xi_y * m.eta_y + m.xi_x * m.eta_x) + V;
  G[1](2, 0) = -(m.xi_z / p3) * (U * m.eta_y - V * m.xi_y);
  G[1](3, 0) = ((cbar * xn + U) / (2 * xn2)) * (m.xi_x * m.eta_y - m.xi_y * m.eta_x);
  G[1](4, 0) = ((cbar * xn - U) / (2 * xn2)) * (m.xi_x * m.eta_y - m.xi_y * m.eta_x);
  G[2](1, 0) = -(m.xi_y / p2) * (U * m.eta_z - V * m.xi_z);
  G[2](2, 0) = -(U / p3) * (m.xi_z * m.eta_z + m.xi_x * m.eta_x) + V;
  G[2](3, 0) = ((cbar * xn + U) / (2 * xn2)) * (m.xi_x * m.eta_z - m.xi_z * m.eta_x);
  G[2](4, 0) = ((cbar * xn - U) / (2 * xn2)) * (m.xi_x * m.eta_z - m.xi_z * m.eta_x);
  G[3](1, 0) = (U / p2) * (m.xi_y * m.eta_x - m.xi_x * m.eta_y);
  G[3](2, 0) = (U / p3) * (m.xi_z * m.eta_x - m.xi_x * m.eta_z);
  G[3](3, 0) = -U * nm.dot_xieta / xn2 + V;
  G[4](1, 0) = -G[3](1, 0);
  G[4](2, 0) = -G[3](2, 0);
  G[4](4, 0) = G[3](3, 0);

  H[1](1, 0) = -(U / p2) * (m.xi_y * m.zeta_y + m.xi_x * m.zeta_x) + W;
  H[1](2, 0) = -(m.xi_z / p3) * (U * m.zeta_y - W * m.xi_y);
  H[1](3, 0) = ((cbar * xn + U) / (2 * xn2)) * (m.xi_x * m.zeta_y - m.xi_y * m.zeta_x);
  H[1](4, 0) = ((cbar * xn - U) / (2 * xn2)) * (m.xi_x * m.zeta_y - m.xi_y * m.zeta_x);
  H[2](1, 0) = -(m.xi_y / p2) * (U * m.zeta_z - W * m.xi_z);
  H[2](2, 0) = -(U / p3) * (m.xi_z * m.zeta_z + m.xi_x * m.zeta_x) + W;
  H[2](3, 0) = ((cbar * xn + U) / (2 * xn2)) * (m.xi_x * m.zeta_z - m.xi_z * m.zeta_x);
  H[2](4, 0) = ((cbar * xn - U) / (2 * xn2)) * (m.xi_x * m.zeta_z - m.xi_z * m.zeta_x);
  H[3](1, 0) = (U / p2) * (m.xi_y * m.zeta_x - m.xi_x * m.zeta_y);
  H[3](2, 0) = (U / p3) * (m.xi_z * m.zeta_x - m.xi_x * m.zeta_z);
  H[3](3, 0) = -U * (h44_xi_eta ? nm.dot_xieta : nm.dot_xizeta) / xn2 + W;
  H[4](1, 0) = -H[3](1, 0);
  H[4](2, 0) = -H[3](2, 0);
  H[4](4, 0) = -U * nm.dot_xizeta / xn2 + W;
}

// column conjugation between nondimensional and dimensional perturbation
// variables; tangential rows pick up one extra velocity scale
inline void to_dimensional_rows(const MeanFlow& flow, Vec5& time_row, Vec5& g_row,
                                Vec5& h_row) {
  Vec5 s = unit_scaling(flow);
  real row_norm = flow.rho_bar * flow.c_bar * flow.c_bar;
  for (int j = 0; j < 5; ++j) {
    time_row(j, 0) *= row_norm / s(j, 0);
    g_row(j, 0) *= flow.c_bar * row_norm / s(j, 0);
    h_row(j, 0) *= flow.c_bar * row_norm / s(j, 0);
  }
}

}  // namespace detail

namespace detail {

// Shared assembly for the quasi-3D and modified operators. m1/m2 are the
// reflection-correction coefficients of the modified inflow rows (zero
// for the plain quasi-3D variant); they enter the fourth tangential rows
// before any basis or unit transformation.
inline BCOperator assemble_operator(const Metric& m, const MeanFlow& flow,
                                    Side side, Basis basis, UnitMode mode,
                                    H44Reading h44, real m1, real m2,
                                    Variant variant) {
  m.validate();
  flow.validate();
  MeanFlow nd = nondimensionalize(flow);
  MetricNorms nm = compute_norms(m);
  ContravariantFlow cv = contravariant(m, nd);

  // nondimensional primitive rows from the Taylor expansion
  std::array<Vec5, 5> T{}, G{}, H{};
  for (int n = 1; n <= 5; ++n) {
    TaylorVLeft t = taylor_v_left(n, m, nd);
    T[n - 1] = t.value;
    G[n - 1] = -1.0 * t.d_lambda1;
    H[n - 1] = -1.0 * t.d_lambda2;
  }

  std::array<Vec5, 5> Gt, Ht;
  detail::closed_tables(m, cv, nm, Gt, Ht);
  real scale = std::max({max_abs(Gt[3]), max_abs(Ht[3]), nm.norm_xi, 1.0});
  for (int n = 0; n < 5; ++n)
    require(max_abs(G[n] - Gt[n]) <= 1e-13 * scale &&
                max_abs(H[n] - Ht[n]) <= 1e-13 * scale,
            "InternalInconsistency",
            "quasi-3D tables: Taylor derivatives vs closed forms");

  // modified-variant injections into the fourth rows
  G[3](1, 0) += m1 * m.xi_y;
  G[3](2, 0) -= m1 * m.xi_x;
  H[3](1, 0) += m2 * m.xi_z;
  H[3](3, 0) -= m2 * m.xi_x;

  BCOperator op;
  op.side = side;
  op.basis = basis;
  op.variant = variant;
  op.mode = mode;
  op.h44 = h44;
  op.r = (side == Side::inflow) ? 4 : 1;

  auto pick = [&](const std::array<Vec5, 5>& rows, int slot) {
    return (side == Side::inflow) ? rows[slot] : rows[4];
  };

  if (basis == Basis::primitive) {
    for (int i = 0; i < op.r; ++i) {
      op.time_rows[i] = pick(T, i);
      op.G[i] = pick(G, i);
      op.H[i] = pick(H, i);
      if (mode == UnitMode::dimensional)
        detail::to_dimensional_rows(flow, op.time_rows[i], op.G[i], op.H[i]);
    }
    return op;
  }

  // characteristic basis: amplitudes evolve with identity time rows and
  // the similarity-transformed tangential tables
  real cbar = (mode == UnitMode::dimensional) ? flow.c_bar : 1.0;
  std::array<Vec5, 5> Gc, Hc;
  detail::closed_tables_char(m, cv.U * cbar, cv.V * cbar, cv.W * cbar, cbar, nm,
                             h44 == H44Reading::xi_eta, Gc, Hc);
  // modified injections in characteristic form (projection of the
  // primitive injections onto the modal columns)
  Gc[3](1, 0) -= cbar * m1;
  Gc[3](2, 0) -= cbar * m1 * m.xi_y * m.xi_z / sq(nm.psi3);
  Hc[3](1, 0) -= cbar * m2 * m.xi_y * m.xi_z / sq(nm.psi2);
  Hc[3](2, 0) -= cbar * m2;

  // similarity check: table rows times the modal reconstruction columns
  CharTransform tr = build_transform(m, nd, UnitMode::nondimensional,
                                     Reconstruction::modal);
  real cscale = std::max({scale, cbar, std::abs(m1), std::abs(m2)});
  for (int n = 0; n < 5; ++n) {
    Vec5 gsim = cbar * row_times(G[n], tr.from_char);
    Vec5 hsim = cbar * row_times(H[n], tr.from_char);
    for (int j = 0; j < 5; ++j) {
      if (h44 == H44Reading::xi_eta && n == 3 && j == 3) continue;  // published entry kept as-is
      require(std::abs(gsim(j, 0) - Gc[n](j, 0)) <= 1e-12 * cscale &&
                  std::abs(hsim(j, 0) - Hc[n](j, 0)) <= 1e-12 * cscale,
              "InternalInconsistency",
              "characteristic tables disagree with the similarity transform");
    }
  }

  for (int i = 0; i < op.r; ++i) {
    op.time_rows[i] = Vec5{};
    op.time_rows[i]((side == Side::inflow) ? i : 4, 0) = 1.0;
    op.G[i] = pick(Gc, i);
    op.H[i] = pick(Hc, i);
  }
  return op;
}

}  // namespace detail

// Quasi-3D operator for one face. The tangential tables are assembled
// symbolically from the closed forms and cross-checked against the
// Taylor derivatives of v_n^L; the characteristic basis additionally
// cross-checks the similarity transform through the modal reconstruction.
inline BCOperator build_quasi3d(const Metric& m, const MeanFlow& flow, Side side,
                                Basis basis = Basis::primitive,
                                UnitMode mode = UnitMode::nondimensional,
                                H44Reading h44 = H44Reading::xi_zeta) {
  return detail::assemble_operator(m, flow, side, basis, mode, h44, 0.0, 0.0,
                                   Variant::quasi3d);
}

// First-order operator in the same shape: the tangential tables vanish,
// leaving the 1-D characteristic rows.
inline BCOperator build_first_order(const Metric& m, const MeanFlow& flow, Side side,
                                    Basis basis = Basis::primitive,
                                    UnitMode mode = UnitMode::nondimensional) {
  BCOperator op = build_quasi3d(m, flow, side, basis, mode);
  op.variant = Variant::first_order;
  for (int i = 0; i < op.r; ++i) {
    op.G[i] = Vec5{};
    op.H[i] = Vec5{};
  }
  return op;
}

// Residual rows: time_rows * qt + G * q_eta + H * q_zeta. A perfectly
// absorbed field drives this to zero.
template <class T>
std::array<T, 4> bc_residual(const BCOperator& op, const Vec<T, 5>& qt,
                             const Vec<T, 5>& q_eta, const Vec<T, 5>& q_zeta) {
  std::array<T, 4> res{};
  for (int i = 0; i < op.r; ++i) {
    T s{};
    for (int j = 0; j < 5; ++j)
      s += T(op.time_rows[i](j, 0)) * qt(j, 0) + T(op.G[i](j, 0)) * q_eta(j, 0) +
           T(op.H[i](j, 0)) * q_zeta(j, 0);
    res[i] = s;
  }
  return res;
}

}  // namespace curvibc
