#pragma once

// Seeded random sampling of metrics, flows and wavenumber ratios for the
// verification suites. Everything draws from the splitmix64 stream, so a
// seed pins the whole sample set.

#include "curvibc/core.hpp"
#include "curvibc/dispersion.hpp"
#include "curvibc/linalg.hpp"
#include "curvibc/metrics.hpp"

namespace curvibc {

// Well-conditioned general metric: identity plus bounded noise, with the
// condition number and the Psi normalizations kept healthy.
inline Metric random_metric(Rng& rng, real cond_max = 10.0) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Mat3 M;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        M(r, c) = (r == c ? 1.0 : 0.0) + rng.uniform(-0.45, 0.45);
    real s = rng.uniform(0.7, 1.5);
    for (auto& v : M.a) v *= s;
    Metric m;
    m.xi_x = M(0, 0); m.xi_y = M(0, 1); m.xi_z = M(0, 2);
    m.eta_x = M(1, 0); m.eta_y = M(1, 1); m.eta_z = M(1, 2);
    m.zeta_x = M(2, 0); m.zeta_y = M(2, 1); m.zeta_z = M(2, 2);
    MetricNorms n = compute_norms(m);
    if (!m.is_valid()) continue;
    if (condition_number(M) > cond_max) continue;
    if (n.psi2 < 0.2 * n.norm_xi || n.psi3 < 0.2 * n.norm_xi) continue;
    return m;
  }
  fail("SamplingFailure", "could not draw a valid metric");
}

// Orthogonal-at-the-boundary metric: a random rotation with per-row
// scaling. Gram-Schmidt keeps the rows orthogonal to roundoff.
inline Metric random_orthogonal_metric(Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec3 a, b, c;
    for (int i = 0; i < 3; ++i) {
      a(i, 0) = rng.uniform(-1, 1);
      b(i, 0) = rng.uniform(-1, 1);
    }
    real na = std::sqrt(dot(a, a));
    if (na < 0.3) continue;
    for (int i = 0; i < 3; ++i) a(i, 0) /= na;
    real ab = dot(a, b);
    for (int i = 0; i < 3; ++i) b(i, 0) -= ab * a(i, 0);
    real nb = std::sqrt(dot(b, b));
    if (nb < 0.3) continue;
    for (int i = 0; i < 3; ++i) b(i, 0) /= nb;
    c(0, 0) = a(1, 0) * b(2, 0) - a(2, 0) * b(1, 0);
    c(1, 0) = a(2, 0) * b(0, 0) - a(0, 0) * b(2, 0);
    c(2, 0) = a(0, 0) * b(1, 0) - a(1, 0) * b(0, 0);
    real sa = rng.uniform(0.5, 3.0), sb = rng.uniform(0.5, 3.0), sc = rng.uniform(0.5, 3.0);
    Metric m = Metric::from_rows(sa * a, sb * b, sc * c);
    MetricNorms n = compute_norms(m);
    if (n.psi2 < 0.2 * n.norm_xi || n.psi3 < 0.2 * n.norm_xi) continue;
    if (!m.is_valid() || !is_orthogonal(m)) continue;
    return m;
  }
  fail("SamplingFailure", "could not draw an orthogonal metric");
}

// Nondimensional mean flow with 0 < U < |xi| for the given metric: a
// boundary-normal subsonic core plus bounded tangential noise.
inline MeanFlow random_subsonic_flow(Rng& rng, const Metric& m) {
  MetricNorms n = compute_norms(m);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    real mag = rng.uniform(0.12, 0.85);
    MeanFlow f = MeanFlow::nondimensional(
        mag * m.xi_x / n.norm_xi + rng.uniform(-0.15, 0.15),
        mag * m.xi_y / n.norm_xi + rng.uniform(-0.15, 0.15),
        mag * m.xi_z / n.norm_xi + rng.uniform(-0.15, 0.15));
    ContravariantFlow cv = contravariant(m, f);
    real speed = std::sqrt(sq(f.u_bar) + sq(f.v_bar) + sq(f.w_bar));
    if (cv.U > 0.08 * n.norm_xi && cv.U < 0.92 * n.norm_xi && speed < 0.97) return f;
  }
  fail("SamplingFailure", "could not draw a subsonic flow");
}

inline LambdaPair random_lambda(Rng& rng, real max_abs = 0.3) {
  return {cplx(rng.uniform(-max_abs, max_abs), 0.0),
          cplx(rng.uniform(-max_abs, max_abs), 0.0)};
}

}  // namespace curvibc
