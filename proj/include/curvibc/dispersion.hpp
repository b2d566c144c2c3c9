#pragma once

// Closed-form roots of the plane-wave dispersion relation in k and omega,
// group velocities of the acoustic pair, wave classification, and the
// lambda-parameterized quantities used by the boundary operators.

#include <array>

#include "curvibc/core.hpp"
#include "curvibc/lee_matrices.hpp"
#include "curvibc/metrics.hpp"

namespace curvibc {

enum class WaveKind { entropy, vorticity_zeta, vorticity_eta, acoustic_down, acoustic_up };

// Which boundary the wave enters through (the opposite face sees it leave).
enum class IncomingSide { inflow, outflow };

inline const char* to_string(WaveKind k) {
  switch (k) {
    case WaveKind::entropy: return "entropy";
    case WaveKind::vorticity_zeta: return "vorticity_zeta";
    case WaveKind::vorticity_eta: return "vorticity_eta";
    case WaveKind::acoustic_down: return "acoustic_down";
    case WaveKind::acoustic_up: return "acoustic_up";
  }
  return "?";
}

// Tangential wavenumbers divided by frequency; the whole eigenvector
// catalogue is written in these variables.
struct LambdaPair {
  cplx lambda1{}, lambda2{};

  static LambdaPair from_wave(const WaveVector& w) {
    require(w.omega != cplx(0), "ZeroFrequency",
            "lambda parameterization needs omega != 0");
    return {w.l / w.omega, w.m / w.omega};
  }
};

struct RootSet {
  std::array<cplx, 5> k{};
  std::array<WaveKind, 5> kind{WaveKind::entropy, WaveKind::vorticity_zeta,
                               WaveKind::vorticity_eta, WaveKind::acoustic_down,
                               WaveKind::acoustic_up};
  std::array<IncomingSide, 5> incoming{};
  bool supersonic = false;
};

namespace detail {

// scalar ingredients of the acoustic quadratic in k
struct Quadratic {
  cplx mu, Xi, Ups;  // frequency offset, metric cross term, tangential quadratic
  real D;            // |xi|^2 - U^2
  MetricNorms n;
  ContravariantFlow cv;
};

inline Quadratic quadratic_terms(const Metric& m, const MeanFlow& flow, cplx l,
                                 cplx m_wn, cplx omega) {
  Quadratic q;
  q.n = compute_norms(m);
  q.cv = contravariant(m, flow);
  q.mu = omega - q.cv.V * l - q.cv.W * m_wn;
  q.Xi = l * q.n.dot_xieta + m_wn * q.n.dot_xizeta;
  q.Ups = l * l * sq(q.n.norm_eta) + m_wn * m_wn * sq(q.n.norm_zeta) +
          2.0 * l * m_wn * q.n.dot_etazeta;
  q.D = sq(q.n.norm_xi) - sq(q.cv.U);
  return q;
}

}  // namespace detail

// Group velocities of the acoustic pair at real wavenumbers: the mean
// contravariant speed plus/minus the metric-projected phase direction.
inline std::pair<real, real> group_velocity_acoustic(const Metric& m,
                                                     const MeanFlow& flow, real k,
                                                     real l, real m_wn) {
  ContravariantFlow cv = contravariant(m, flow);
  real a1 = m.xi_x * k + m.eta_x * l + m.zeta_x * m_wn;
  real a2 = m.xi_y * k + m.eta_y * l + m.zeta_y * m_wn;
  real a3 = m.xi_z * k + m.eta_z * l + m.zeta_z * m_wn;
  real anorm = std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
  require(anorm > 0, "ZeroAlphaVector",
          "group velocity undefined at zero metric-contracted wavenumber");
  real proj = (a1 * m.xi_x + a2 * m.xi_y + a3 * m.xi_z) / anorm;
  return {cv.U + proj, cv.U - proj};
}

// All five k-roots at fixed (l, m, omega). The triple root is the
// convected one; the acoustic pair comes from the quadratic factor.
// Branch labeling: for Im(omega) > 0 the downstream root is the one with
// positive imaginary part; for real omega the group-velocity sign decides.
inline RootSet roots_k(const Metric& m, const MeanFlow& flow, cplx l, cplx m_wn,
                       cplx omega) {
  m.validate();
  auto q = detail::quadratic_terms(m, flow, l, m_wn, omega);
  require(std::abs(q.cv.U) > 1e-13 * q.n.norm_xi * std::max(flow.c_bar, 1.0),
          "CriticalStreamwise", "triple root undefined at zero contravariant U");
  require(std::abs(q.D) > 1e-13 * sq(q.n.norm_xi), "SonicDegenerate",
          "acoustic roots degenerate at |xi| = |U|");

  RootSet out;
  cplx k123 = q.mu / q.cv.U;
  out.k[0] = out.k[1] = out.k[2] = k123;

  cplx P = q.Xi + q.mu * q.cv.U;
  cplx ka, kb;
  real pscale = std::abs(q.Xi) + std::abs(q.mu) * std::abs(q.cv.U);
  if (std::abs(P) > 1e-13 * pscale && pscale > 0) {
    cplx S = std::sqrt(cplx(1) - q.D * (q.Ups - q.mu * q.mu) / (P * P));
    ka = P * (cplx(-1) + S) / q.D;
    kb = P * (cplx(-1) - S) / q.D;
  } else {
    // prefactor vanished: both algebraic-form roots collapse, so use the
    // plain quadratic formula on the discriminant instead
    cplx disc = std::sqrt(P * P - q.D * (q.Ups - q.mu * q.mu));
    ka = (-P + disc) / q.D;
    kb = (-P - disc) / q.D;
  }

  bool a_is_down;
  real wscale = std::max({std::abs(omega), std::abs(l), std::abs(m_wn), 1e-300});
  if (omega.imag() > 1e-12 * wscale) {
    a_is_down = ka.imag() >= kb.imag();
  } else {
    // real-frequency tiebreak by group velocity on each root's own branch
    auto cg = [&](cplx k) -> real {
      cplx a1 = m.xi_x * k + m.eta_x * l + m.zeta_x * m_wn;
      cplx a2 = m.xi_y * k + m.eta_y * l + m.zeta_y * m_wn;
      cplx a3 = m.xi_z * k + m.eta_z * l + m.zeta_z * m_wn;
      cplx beta = q.cv.U * k + q.cv.V * l + q.cv.W * m_wn - omega;
      if (std::abs(beta) == 0) return 0.0;
      cplx proj = a1 * m.xi_x + a2 * m.xi_y + a3 * m.xi_z;
      return q.cv.U - (proj / beta).real();
    };
    real cga = cg(ka), cgb = cg(kb);
    a_is_down = cga >= cgb;
  }
  out.k[3] = a_is_down ? ka : kb;
  out.k[4] = a_is_down ? kb : ka;

  out.supersonic = std::abs(q.cv.U) > q.n.norm_xi;
  // convected waves and the downstream acoustic wave enter with the flow;
  // the upstream acoustic wave flips side only when the flow is subsonic
  IncomingSide with_flow =
      q.cv.U > 0 ? IncomingSide::inflow : IncomingSide::outflow;
  IncomingSide against_flow =
      q.cv.U > 0 ? IncomingSide::outflow : IncomingSide::inflow;
  for (int n = 0; n < 4; ++n) out.incoming[n] = with_flow;
  out.incoming[4] = out.supersonic ? with_flow : against_flow;
  return out;
}

// The five omega-roots at fixed (k, l, m): the convected triple plus the
// acoustic pair offset by the metric-contracted wavenumber magnitude.
inline std::array<cplx, 5> roots_omega(const Metric& m, const MeanFlow& flow,
                                       cplx k, cplx l, cplx m_wn) {
  ContravariantFlow cv = contravariant(m, flow);
  cplx conv = cv.U * k + cv.V * l + cv.W * m_wn;
  cplx a1 = m.xi_x * k + m.eta_x * l + m.zeta_x * m_wn;
  cplx a2 = m.xi_y * k + m.eta_y * l + m.zeta_y * m_wn;
  cplx a3 = m.xi_z * k + m.eta_z * l + m.zeta_z * m_wn;
  cplx s = std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
  return {conv, conv, conv, conv + s, conv - s};
}

// lambda-parameterized scalars shared by the eigenvector catalogue
struct StarQuantities {
  cplx mu, Xi, Ups, prefactor;  // prefactor = Xi* + mu* U
  real D;
  MetricNorms n;
  ContravariantFlow cv;
};

inline StarQuantities star_quantities(const Metric& m, const MeanFlow& flow,
                                      const LambdaPair& lp) {
  StarQuantities s;
  s.n = compute_norms(m);
  s.cv = contravariant(m, flow);
  s.mu = cplx(1) - s.cv.V * lp.lambda1 - s.cv.W * lp.lambda2;
  s.Xi = lp.lambda1 * s.n.dot_xieta + lp.lambda2 * s.n.dot_xizeta;
  s.Ups = lp.lambda1 * lp.lambda1 * sq(s.n.norm_eta) +
          lp.lambda2 * lp.lambda2 * sq(s.n.norm_zeta) +
          2.0 * lp.lambda1 * lp.lambda2 * s.n.dot_etazeta;
  s.prefactor = s.Xi + s.mu * s.cv.U;
  s.D = sq(s.n.norm_xi) - sq(s.cv.U);
  return s;
}

// Square-root factor of the acoustic quadratic in lambda form. Branch
// rule: principal branch, which returns the positive root whenever the
// radicand is real and positive (the case the well-posedness loci live
// on); complex frequencies get their branch fixed by the caller against
// the sign of Im(k).
inline cplx s_star(const Metric& m, const MeanFlow& flow, const LambdaPair& lp) {
  auto s = star_quantities(m, flow, lp);
  real pscale =
      std::abs(s.Xi) + std::abs(s.mu) * std::abs(s.cv.U) + 1e-300;
  require(std::abs(s.prefactor) > 1e-13 * pscale, "DegeneratePrefactor",
          "S* undefined where Xi* + mu* U vanishes");
  cplx radicand =
      cplx(1) - s.D * (s.Ups - s.mu * s.mu) / (s.prefactor * s.prefactor);
  return std::sqrt(radicand);
}

// k/omega for the acoustic roots as a function of lambda alone; n = 4 is
// the downstream wave, n = 5 the upstream one. The S* branch is chosen so
// the labels track the physical propagation direction: in the subsonic
// case the downstream root is the one with the larger real part, which
// reproduces the (-1 + S*) form whenever the prefactor is positive and
// keeps Im(k4) >= 0 on the imaginary-frequency loci.
inline cplx k_star(int n, const Metric& m, const MeanFlow& flow,
                   const LambdaPair& lp) {
  require(n == 4 || n == 5, "BadModeIndex", "k* defined for acoustic modes 4, 5");
  auto s = star_quantities(m, flow, lp);
  require(std::abs(s.D) > 1e-13 * sq(s.n.norm_xi), "SonicDegenerate",
          "k* degenerate at |xi| = |U|");
  cplx ss = s_star(m, flow, lp);
  cplx ka = s.prefactor * (cplx(-1) + ss) / s.D;
  cplx kb = s.prefactor * (cplx(-1) - ss) / s.D;
  bool subsonic = s.D > 0;
  if (subsonic && ka.real() < kb.real()) std::swap(ka, kb);
  return (n == 4) ? ka : kb;
}

// Convected-family k/omega; kept for symmetry with the acoustic pair.
inline cplx k_star_convected(const Metric& m, const MeanFlow& flow,
                             const LambdaPair& lp) {
  auto s = star_quantities(m, flow, lp);
  require(std::abs(s.cv.U) > 0, "CriticalStreamwise", "k* undefined at U = 0");
  return s.mu / s.cv.U;
}

}  // namespace curvibc
