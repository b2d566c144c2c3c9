#pragma once

// Normal-mode well-posedness machinery: the inflow critical matrix, the
// outflow critical scalar, detection of the ill-posed inflow mode on
// orthogonal grids, and a numeric determinant scanner for everything the
// closed-form analysis does not cover.

#include <vector>

#include "curvibc/bc_modified.hpp"
#include "curvibc/bc_quasi3d.hpp"
#include "curvibc/core.hpp"
#include "curvibc/eigenvectors.hpp"

namespace curvibc {

// Boost to the frame advected with the tangential contravariant
// velocities: the Cartesian velocity that keeps U and zeroes V and W.
// Well-posedness in this frame is equivalent to the original one.
inline MeanFlow moving_frame(const Metric& m, const MeanFlow& flow) {
  m.validate();
  ContravariantFlow cv = contravariant(m, flow);
  Mat3 M = m.as_matrix();
  Vec3 rhs;
  rhs(0, 0) = cv.U;
  auto f = lu_factor(M);
  require(!f.singular, "SingularMapping", "metric not invertible");
  Vec3 vel = lu_solve(f, rhs);
  MeanFlow out = flow;
  out.u_bar = vel(0, 0);
  out.v_bar = vel(1, 0);
  out.w_bar = vel(2, 0);
  return out;
}

inline bool in_moving_frame(const Metric& m, const MeanFlow& flow) {
  ContravariantFlow cv = contravariant(m, flow);
  MetricNorms n = compute_norms(m);
  real vmax = std::max({std::abs(flow.u_bar), std::abs(flow.v_bar),
                        std::abs(flow.w_bar), flow.c_bar});
  real scale = vmax * std::max({n.norm_eta, n.norm_zeta, n.norm_xi});
  return std::abs(cv.V) <= 1e-12 * scale && std::abs(cv.W) <= 1e-12 * scale;
}

// gamma_i = xi_i + lambda1 U eta_i + lambda2 U zeta_i; the key cancellation
// of the ill-posedness analysis is gamma.gamma = 0 on the critical locus.
inline std::array<cplx, 3> gamma_vector(const Metric& m, real U,
                                        const LambdaPair& lp) {
  return {m.xi_x + lp.lambda1 * U * m.eta_x + lp.lambda2 * U * m.zeta_x,
          m.xi_y + lp.lambda1 * U * m.eta_y + lp.lambda2 * U * m.zeta_y,
          m.xi_z + lp.lambda1 * U * m.eta_z + lp.lambda2 * U * m.zeta_z};
}

struct CriticalMatrix {
  CMat4 C;
  LambdaPair lp;
};

// Inflow critical matrix c_nj: the truncated boundary rows dotted with
// the exact right eigenvectors, for the four incoming modes. Requires the
// tangentially-advected frame. Entries are also assembled from the closed
// forms and cross-checked; a mismatch is a coding fault.
inline CriticalMatrix critical_matrix_inflow(const Metric& m, const MeanFlow& flow,
                                             const LambdaPair& lp) {
  m.validate();
  MeanFlow nd = nondimensionalize(flow);
  require(in_moving_frame(m, nd), "MovingFrameRequired",
          "critical matrix is defined in the V = W = 0 frame");

  // direct dot products
  CriticalMatrix out;
  out.lp = lp;
  std::array<CVec5, 4> vbar;
  for (int n = 1; n <= 4; ++n) {
    TaylorVLeft t = taylor_v_left(n, m, nd);
    for (int j = 0; j < 5; ++j)
      vbar[n - 1](j, 0) = cplx(t.value(j, 0)) + lp.lambda1 * t.d_lambda1(j, 0) +
                          lp.lambda2 * t.d_lambda2(j, 0);
  }
  std::array<CVec5, 4> uR;
  for (int j = 1; j <= 4; ++j) uR[j - 1] = right_eigenvector(j, m, nd, lp);
  for (int n = 0; n < 4; ++n)
    for (int j = 0; j < 4; ++j) out.C(n, j) = dot(vbar[n], uR[j]);

  // closed forms
  MetricNorms nm = compute_norms(m);
  ContravariantFlow cv = contravariant(m, nd);
  const real U = cv.U, xn = nm.norm_xi;
  auto g = gamma_vector(m, U, lp);
  cplx k4 = k_star(4, m, nd, lp);
  cplx q = xn + lp.lambda1 * U * nm.dot_xieta / xn + lp.lambda2 * U * nm.dot_xizeta / xn;
  cplx ups = lp.lambda1 * lp.lambda1 * sq(nm.norm_eta) +
             lp.lambda2 * lp.lambda2 * sq(nm.norm_zeta) +
             2.0 * lp.lambda1 * lp.lambda2 * nm.dot_etazeta;
  CMat4 ref;
  ref(0, 0) = 1;
  ref(1, 1) = (g[1] * g[1] + g[0] * g[0]) / sq(nm.psi2);
  ref(1, 2) = g[1] * g[2] / sq(nm.psi3);
  ref(2, 1) = g[1] * g[2] / sq(nm.psi2);
  ref(2, 2) = (g[2] * g[2] + g[0] * g[0]) / sq(nm.psi3);
  ref(3, 3) = (U + xn) / (2 * xn * xn) *
              (k4 * xn * xn + U * ups + lp.lambda1 * nm.dot_xieta +
               lp.lambda2 * nm.dot_xizeta + k4 * U * (lp.lambda1 * nm.dot_xieta +
                                                      lp.lambda2 * nm.dot_xizeta - q) +
               q);
  real scale = std::max(max_abs(out.C), real(1));
  require(max_abs(out.C - ref) <= 1e-12 * scale, "InternalInconsistency",
          "critical matrix: dot products vs closed forms");
  return out;
}

// Critical matrix of the modified inflow rows (fourth row corrected by
// the m1/m2 injections).
inline CriticalMatrix critical_matrix_inflow_modified(const Metric& m,
                                                      const MeanFlow& flow,
                                                      const LambdaPair& lp,
                                                      MPath path = MPath::automatic) {
  CriticalMatrix out = critical_matrix_inflow(m, flow, lp);
  MeanFlow nd = nondimensionalize(flow);
  CVec5 v4 = modified_v4(m, nd, lp, path);
  for (int j = 1; j <= 4; ++j)
    out.C(3, j - 1) = dot(v4, right_eigenvector(j, m, nd, lp));
  return out;
}

// Outflow critical scalar: the truncated fifth row dotted with the exact
// upstream-acoustic eigenvector. Assembled twice (dot product and closed
// bracket) and cross-checked.
inline cplx outflow_critical_scalar(const Metric& m, const MeanFlow& flow,
                                    const LambdaPair& lp) {
  MeanFlow nd = nondimensionalize(flow);
  require(in_moving_frame(m, nd), "MovingFrameRequired",
          "critical scalar is defined in the V = W = 0 frame");
  TaylorVLeft t = taylor_v_left(5, m, nd);
  CVec5 v5;
  for (int j = 0; j < 5; ++j)
    v5(j, 0) = cplx(t.value(j, 0)) + lp.lambda1 * t.d_lambda1(j, 0) +
               lp.lambda2 * t.d_lambda2(j, 0);
  cplx direct = dot(v5, right_eigenvector(5, m, nd, lp));

  MetricNorms nm = compute_norms(m);
  ContravariantFlow cv = contravariant(m, nd);
  const real U = cv.U, xn = nm.norm_xi;
  cplx k5 = k_star(5, m, nd, lp);
  cplx q = xn + lp.lambda1 * U * nm.dot_xieta / xn + lp.lambda2 * U * nm.dot_xizeta / xn;
  cplx ups = lp.lambda1 * lp.lambda1 * sq(nm.norm_eta) +
             lp.lambda2 * lp.lambda2 * sq(nm.norm_zeta) +
             2.0 * lp.lambda1 * lp.lambda2 * nm.dot_etazeta;
  cplx bracket = k5 * xn * xn + U * ups + lp.lambda1 * nm.dot_xieta +
                 lp.lambda2 * nm.dot_xizeta +
                 k5 * U * (lp.lambda1 * nm.dot_xieta + lp.lambda2 * nm.dot_xizeta + q) -
                 q;
  cplx closed = (U - xn) / (2 * xn * xn) * bracket;
  require(rel_close(direct, closed, 1e-12), "InternalInconsistency",
          "outflow critical scalar: dot product vs closed bracket");
  return direct;
}

// The candidate ill-posed frequency on an orthogonal grid: purely
// imaginary, scaled by the tangential wavenumber content.
inline cplx illposed_frequency(const Metric& m, const MeanFlow& flow, real l,
                               real m_wn) {
  MetricNorms nm = compute_norms(m);
  ContravariantFlow cv = contravariant(m, nondimensionalize(flow));
  real mag = std::sqrt((l * l * sq(nm.norm_eta) + m_wn * m_wn * sq(nm.norm_zeta)) /
                       sq(nm.norm_xi));
  return cplx(0.0, cv.U * mag);
}

struct InflowFinding {
  bool illposed = false;
  cplx omega{};
  int rank = 4;
  cplx k3_star{}, k4_star{};
  cplx det{};
  real gamma_cancellation = 0;  // |gamma.gamma| at the locus
  std::string note;
};

// Scan the candidate locus for one (l, m) pair. Orthogonal grids only;
// the frequency formula is not defined off that assumption.
inline InflowFinding detect_illposed_inflow(const Metric& m, const MeanFlow& flow,
                                            real l, real m_wn) {
  require(is_orthogonal(m), "NonOrthogonalGrid",
          "ill-posed-mode detection requires an orthogonal boundary metric");
  MeanFlow frame = nondimensionalize(moving_frame(m, flow));
  MetricNorms nm = compute_norms(m);
  ContravariantFlow cv = contravariant(m, frame);
  require(cv.U > 0 && cv.U < nm.norm_xi, "SonicDegenerate",
          "analysis requires subsonic 0 < U < |xi|");

  InflowFinding f;
  f.omega = illposed_frequency(m, frame, l, m_wn);
  if (std::abs(f.omega) == 0.0) {
    f.note = "degenerate locus (l = m = 0): no ill-posed mode";
    return f;
  }
  LambdaPair lp{l / f.omega, m_wn / f.omega};
  CriticalMatrix cm = critical_matrix_inflow(m, frame, lp);
  f.rank = numeric_rank(cm.C, 1e-8);
  f.det = lu_det(cm.C);
  f.k3_star = cplx(1.0 / cv.U);
  f.k4_star = k_star(4, m, frame, lp);
  auto g = gamma_vector(m, cv.U, lp);
  f.gamma_cancellation = std::abs(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
  f.illposed = f.rank <= 2;
  f.note = f.illposed ? "ill-posed with two ill-posed modes"
                      : "no rank deficiency at the candidate locus";
  return f;
}

struct OutflowVerdict {
  bool well_posed = false;
  real min_abs_scalar = 0;
  real scale = 1;  // the lambda = 0 scalar
  real l_at_min = 0, m_at_min = 0;
};

// Sweep the candidate locus over real (l, m): at every point the scalar
// must stay away from zero for the outflow condition to admit no
// incoming mode.
inline OutflowVerdict outflow_wellposed_check(const Metric& m, const MeanFlow& flow,
                                              real lmax = 2.0, int nsweep = 50) {
  require(is_orthogonal(m), "NonOrthogonalGrid",
          "outflow check requires an orthogonal boundary metric");
  MeanFlow frame = nondimensionalize(moving_frame(m, flow));
  MetricNorms nm = compute_norms(m);
  ContravariantFlow cv = contravariant(m, frame);
  require(cv.U > 0 && cv.U < nm.norm_xi, "SonicDegenerate",
          "analysis requires subsonic 0 < U < |xi|");

  OutflowVerdict v;
  v.min_abs_scalar = std::numeric_limits<real>::infinity();
  for (int i = 0; i < nsweep; ++i)
    for (int j = 0; j < nsweep; ++j) {
      real l = -lmax + 2 * lmax * i / (nsweep - 1);
      real m_wn = -lmax + 2 * lmax * j / (nsweep - 1);
      cplx omega = illposed_frequency(m, frame, l, m_wn);
      real mag;
      if (std::abs(omega) == 0.0) {
        mag = 1.0;  // 1-D limit: the scalar is the unit normalization
      } else {
        LambdaPair lp{l / omega, m_wn / omega};
        mag = std::abs(outflow_critical_scalar(m, frame, lp));
      }
      if (mag < v.min_abs_scalar) {
        v.min_abs_scalar = mag;
        v.l_at_min = l;
        v.m_at_min = m_wn;
      }
    }
  v.well_posed = v.min_abs_scalar > 0.01 * v.scale;
  return v;
}

struct DetScanPoint {
  cplx omega;
  real abs_det;
};

struct DetScan {
  std::vector<DetScanPoint> grid;  // row-major over (re, im)
  cplx argmin{};
  real min_abs_det = 0;
};

// Numeric determinant scan of the inflow critical matrix over a complex
// frequency window. This is the only tool offered for non-orthogonal
// grids; it locates candidate zeros but proves nothing.
inline DetScan det_scan_inflow(const Metric& m, const MeanFlow& flow, real l,
                               real m_wn, cplx omega_center, real half_width,
                               int n = 50, bool modified = false) {
  MeanFlow frame = nondimensionalize(moving_frame(m, flow));
  DetScan scan;
  scan.min_abs_det = std::numeric_limits<real>::infinity();
  real base = std::abs(omega_center);
  require(base > 0, "ZeroFrequency", "scan window needs a nonzero center");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      real re = (-half_width + 2 * half_width * i / (n - 1)) * base;
      real im_fac = 1.0 - half_width + 2 * half_width * j / (n - 1);
      cplx omega = cplx(re, omega_center.imag() * im_fac);
      if (omega.imag() < 0 || std::abs(omega) == 0.0) continue;
      LambdaPair lp{l / omega, m_wn / omega};
      CriticalMatrix cm = modified
                              ? critical_matrix_inflow_modified(m, frame, lp)
                              : critical_matrix_inflow(m, frame, lp);
      real d = std::abs(lu_det(cm.C));
      scan.grid.push_back({omega, d});
      if (d < scan.min_abs_det) {
        scan.min_abs_det = d;
        scan.argmin = omega;
      }
    }
  return scan;
}

}  // namespace curvibc
