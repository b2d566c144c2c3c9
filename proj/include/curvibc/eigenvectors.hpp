#pragma once

// The five eigenvector families of the dispersion matrix, written as
// functions of (lambda1, lambda2): right vectors, left vectors, and the
// flux-weighted left rows v_n^L that the boundary operators are built
// from. The lambda -> 0 limits are the w-vectors used by the 1-D
// characteristic transform.

#include <array>

#include "curvibc/core.hpp"
#include "curvibc/dispersion.hpp"
#include "curvibc/lee_matrices.hpp"

namespace curvibc {

struct Mode {
  int index = 0;  // 1..5
  WaveKind kind = WaveKind::entropy;
  CVec5 right{};   // column
  CVec5 left{};    // row
  CVec5 v_left{};  // row
};

namespace detail {

inline WaveKind kind_of(int n) {
  switch (n) {
    case 1: return WaveKind::entropy;
    case 2: return WaveKind::vorticity_zeta;
    case 3: return WaveKind::vorticity_eta;
    case 4: return WaveKind::acoustic_down;
    default: return WaveKind::acoustic_up;
  }
}

struct EigContext {
  StarQuantities s;
  cplx mu;            // 1 - V l1 - W l2
  cplx nx, ny, nz;    // xi_i mu + (eta_i l1 + zeta_i l2) U
  cplx tx, ty, tz;    // eta_i l1 + zeta_i l2
};

inline EigContext eig_context(const Metric& m, const MeanFlow& flow,
                              const LambdaPair& lp) {
  EigContext c;
  c.s = star_quantities(m, flow, lp);
  c.mu = c.s.mu;
  c.tx = m.eta_x * lp.lambda1 + m.zeta_x * lp.lambda2;
  c.ty = m.eta_y * lp.lambda1 + m.zeta_y * lp.lambda2;
  c.tz = m.eta_z * lp.lambda1 + m.zeta_z * lp.lambda2;
  c.nx = m.xi_x * c.mu + c.tx * c.s.cv.U;
  c.ny = m.xi_y * c.mu + c.ty * c.s.cv.U;
  c.nz = m.xi_z * c.mu + c.tz * c.s.cv.U;
  return c;
}

inline void check_psi(int n, const MetricNorms& norms) {
  if (n == 2)
    require(norms.psi2 > 1e-13 * norms.norm_xi, "DegenerateNormalization",
            "Psi2 = 0: xi lies in the x = y = 0 plane");
  if (n == 3)
    require(norms.psi3 > 1e-13 * norms.norm_xi, "DegenerateNormalization",
            "Psi3 = 0: xi lies in the x = z = 0 plane");
}

}  // namespace detail

inline CVec5 right_eigenvector(int n, const Metric& m, const MeanFlow& flow,
                               const LambdaPair& lp) {
  require(n >= 1 && n <= 5, "BadModeIndex", "mode index must be 1..5");
  auto c = detail::eig_context(m, flow, lp);
  detail::check_psi(n, c.s.n);
  CVec5 r;
  switch (n) {
    case 1:
      r(0, 0) = -1.0 / c.s.n.norm_xi;
      break;
    case 2: {
      cplx w = cplx(1) / sq(c.s.n.psi2);
      r(1, 0) = -c.ny * w;
      r(2, 0) = c.nx * w;
      break;
    }
    case 3: {
      cplx w = cplx(1) / sq(c.s.n.psi3);
      r(1, 0) = -c.nz * w;
      r(3, 0) = c.nx * w;
      break;
    }
    case 4: {
      cplx k4 = k_star(4, m, flow, lp);
      cplx psi = c.mu - c.s.cv.U * k4;
      cplx w = (c.s.cv.U + c.s.n.norm_xi) / (2.0 * sq(c.s.n.norm_xi));
      r(0, 0) = w * psi;
      r(1, 0) = w * (m.xi_x * k4 + c.tx);
      r(2, 0) = w * (m.xi_y * k4 + c.ty);
      r(3, 0) = w * (m.xi_z * k4 + c.tz);
      r(4, 0) = w * psi;
      break;
    }
    case 5: {
      cplx k5 = k_star(5, m, flow, lp);
      cplx psi = c.s.cv.U * k5 - c.mu;
      cplx w = (c.s.cv.U - c.s.n.norm_xi) / (2.0 * sq(c.s.n.norm_xi));
      r(0, 0) = w * psi;
      r(1, 0) = -w * (m.xi_x * k5 + c.tx);
      r(2, 0) = -w * (m.xi_y * k5 + c.ty);
      r(3, 0) = -w * (m.xi_z * k5 + c.tz);
      r(4, 0) = w * psi;
      break;
    }
  }
  return r;
}

inline CVec5 left_eigenvector(int n, const Metric& m, const MeanFlow& flow,
                              const LambdaPair& lp) {
  require(n >= 1 && n <= 5, "BadModeIndex", "mode index must be 1..5");
  auto c = detail::eig_context(m, flow, lp);
  detail::check_psi(n, c.s.n);
  CVec5 l;
  switch (n) {
    case 1:
      l(0, 0) = -c.s.n.norm_xi;
      l(4, 0) = c.s.n.norm_xi;
      break;
    case 2:
      l(1, 0) = -c.ny;
      l(2, 0) = c.nx;
      break;
    case 3:
      l(1, 0) = -c.nz;
      l(3, 0) = c.nx;
      break;
    case 4: {
      cplx k4 = k_star(4, m, flow, lp);
      cplx w = c.s.cv.U + c.s.n.norm_xi;
      l(1, 0) = w * (m.xi_x * k4 + c.tx);
      l(2, 0) = w * (m.xi_y * k4 + c.ty);
      l(3, 0) = w * (m.xi_z * k4 + c.tz);
      l(4, 0) = w * (c.mu - c.s.cv.U * k4);
      break;
    }
    case 5: {
      cplx k5 = k_star(5, m, flow, lp);
      cplx w = c.s.cv.U - c.s.n.norm_xi;
      l(1, 0) = -w * (m.xi_x * k5 + c.tx);
      l(2, 0) = -w * (m.xi_y * k5 + c.ty);
      l(3, 0) = -w * (m.xi_z * k5 + c.tz);
      l(4, 0) = w * (c.s.cv.U * k5 - c.mu);
      break;
    }
  }
  return l;
}

// v_n^L: the left eigenvector contracted with the xi-flux matrix and
// scaled by the lambda -> 0 limit of k_n/omega. The closed-form entries
// are assembled directly and cross-checked against the matrix product;
// a mismatch is a coding fault.
inline CVec5 v_left(int n, const Metric& m, const MeanFlow& flow,
                    const LambdaPair& lp) {
  require(n >= 1 && n <= 5, "BadModeIndex", "mode index must be 1..5");
  auto c = detail::eig_context(m, flow, lp);
  detail::check_psi(n, c.s.n);
  const real U = c.s.cv.U, V = c.s.cv.V, W = c.s.cv.W;
  const real xinorm = c.s.n.norm_xi;
  if (n <= 3)
    require(std::abs(U) > 1e-13 * xinorm * std::max(flow.c_bar, 1.0),
            "CriticalStreamwise", "v^L of convected modes needs U != 0");

  const cplx l1 = lp.lambda1, l2 = lp.lambda2;
  CVec5 v;
  switch (n) {
    case 1:
      v(0, 0) = -xinorm;
      v(4, 0) = xinorm;
      break;
    case 2:
      v(1, 0) = -c.ny;
      v(2, 0) = c.nx;
      v(4, 0) = m.xi_y * c.tx - m.xi_x * c.ty;
      break;
    case 3:
      v(1, 0) = -c.nz;
      v(3, 0) = c.nx;
      v(4, 0) = m.xi_z * c.tx - m.xi_x * c.tz;
      break;
    case 4: {
      cplx k4 = k_star(4, m, flow, lp);
      v(1, 0) = m.xi_x + l1 * (U * m.eta_x - V * m.xi_x) + l2 * (U * m.zeta_x - W * m.xi_x);
      v(2, 0) = m.xi_y + l1 * (U * m.eta_y - V * m.xi_y) + l2 * (U * m.zeta_y - W * m.xi_y);
      v(3, 0) = m.xi_z + l1 * (U * m.eta_z - V * m.xi_z) + l2 * (U * m.zeta_z - W * m.xi_z);
      v(4, 0) = U + k4 * c.s.D + l1 * (c.s.n.dot_xieta - U * V) +
                l2 * (c.s.n.dot_xizeta - U * W);
      break;
    }
    case 5: {
      cplx k5 = k_star(5, m, flow, lp);
      v(1, 0) = -(m.xi_x + l1 * (U * m.eta_x - V * m.xi_x) + l2 * (U * m.zeta_x - W * m.xi_x));
      v(2, 0) = -(m.xi_y + l1 * (U * m.eta_y - V * m.xi_y) + l2 * (U * m.zeta_y - W * m.xi_y));
      v(3, 0) = -(m.xi_z + l1 * (U * m.eta_z - V * m.xi_z) + l2 * (U * m.zeta_z - W * m.xi_z));
      v(4, 0) = -(U + k5 * c.s.D + l1 * (c.s.n.dot_xieta - U * V) +
                  l2 * (c.s.n.dot_xizeta - U * W));
      break;
    }
  }

  // cross-check against (lim k*) u^L At
  real limk;
  if (n <= 3)
    limk = 1.0 / U;
  else if (n == 4)
    limk = 1.0 / (U + xinorm);
  else
    limk = 1.0 / (U - xinorm);
  FluxTriple flux = build_curvilinear(m, flow);
  CVec5 prod = row_times(left_eigenvector(n, m, flow, lp), to_complex(flux.A));
  prod *= cplx(limk);
  real scale = std::max(max_abs(v), real(1));
  require(max_abs(v - prod) <= 1e-13 * scale, "InternalInconsistency",
          "v^L closed form disagrees with the matrix-product construction");
  return v;
}

// lambda -> 0 limits: w_n^R and w_n^L, all real. These are the rows and
// columns of the 1-D characteristic transform.
struct LimitVectors {
  std::array<Vec5, 5> right;
  std::array<Vec5, 5> left;
};

inline LimitVectors limit_vectors(const Metric& m, const MeanFlow& flow) {
  (void)flow;
  MetricNorms n = compute_norms(m);
  detail::check_psi(2, n);
  detail::check_psi(3, n);
  const real xn = n.norm_xi;
  LimitVectors w{};

  w.right[0](0, 0) = -1.0 / xn;

  w.right[1](1, 0) = -m.xi_y / sq(n.psi2);
  w.right[1](2, 0) = m.xi_x / sq(n.psi2);

  w.right[2](1, 0) = -m.xi_z / sq(n.psi3);
  w.right[2](3, 0) = m.xi_x / sq(n.psi3);

  w.right[3](0, 0) = 1.0 / (2 * xn);
  w.right[3](1, 0) = m.xi_x / (2 * xn * xn);
  w.right[3](2, 0) = m.xi_y / (2 * xn * xn);
  w.right[3](3, 0) = m.xi_z / (2 * xn * xn);
  w.right[3](4, 0) = 1.0 / (2 * xn);

  w.right[4](0, 0) = 1.0 / (2 * xn);
  w.right[4](1, 0) = -m.xi_x / (2 * xn * xn);
  w.right[4](2, 0) = -m.xi_y / (2 * xn * xn);
  w.right[4](3, 0) = -m.xi_z / (2 * xn * xn);
  w.right[4](4, 0) = 1.0 / (2 * xn);

  w.left[0](0, 0) = -xn;
  w.left[0](4, 0) = xn;

  w.left[1](1, 0) = -m.xi_y;
  w.left[1](2, 0) = m.xi_x;

  w.left[2](1, 0) = -m.xi_z;
  w.left[2](3, 0) = m.xi_x;

  w.left[3](1, 0) = m.xi_x;
  w.left[3](2, 0) = m.xi_y;
  w.left[3](3, 0) = m.xi_z;
  w.left[3](4, 0) = xn;

  w.left[4](1, 0) = -m.xi_x;
  w.left[4](2, 0) = -m.xi_y;
  w.left[4](3, 0) = -m.xi_z;
  w.left[4](4, 0) = xn;

  return w;
}

inline Mode make_mode(int n, const Metric& m, const MeanFlow& flow,
                      const LambdaPair& lp) {
  Mode md;
  md.index = n;
  md.kind = detail::kind_of(n);
  md.right = right_eigenvector(n, m, flow, lp);
  md.left = left_eigenvector(n, m, flow, lp);
  md.v_left = v_left(n, m, flow, lp);
  return md;
}

}  // namespace curvibc
