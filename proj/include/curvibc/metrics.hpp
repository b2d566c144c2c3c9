#pragma once

// Grid-metric algebra at a boundary point: the nine derivative components
// of the computational coordinates w.r.t. the physical ones, their norms
// and inner products, and the contravariant mean velocities built from
// them. Everything downstream consumes these components directly.

#include <cmath>

#include "curvibc/core.hpp"
#include "curvibc/linalg.hpp"

namespace curvibc {

constexpr real kMetricTol = 1e-12;  // orthogonality / nonsingularity checks

struct Metric {
  real xi_x = 1, xi_y = 0, xi_z = 0;
  real eta_x = 0, eta_y = 1, eta_z = 0;
  real zeta_x = 0, zeta_y = 0, zeta_z = 1;

  static Metric cartesian() { return Metric{}; }

  static Metric from_rows(const Vec3& xi, const Vec3& eta, const Vec3& zeta) {
    return Metric{xi(0, 0),   xi(1, 0),   xi(2, 0),  eta(0, 0), eta(1, 0),
                  eta(2, 0),  zeta(0, 0), zeta(1, 0), zeta(2, 0)};
  }

  // rows are the xi, eta, zeta derivative vectors
  Mat3 as_matrix() const {
    Mat3 m;
    m(0, 0) = xi_x;   m(0, 1) = xi_y;   m(0, 2) = xi_z;
    m(1, 0) = eta_x;  m(1, 1) = eta_y;  m(1, 2) = eta_z;
    m(2, 0) = zeta_x; m(2, 1) = zeta_y; m(2, 2) = zeta_z;
    return m;
  }

  real scale() const {
    real s = 0;
    for (real v : {xi_x, xi_y, xi_z, eta_x, eta_y, eta_z, zeta_x, zeta_y, zeta_z})
      s = std::max(s, std::abs(v));
    return s;
  }

  bool is_valid() const {
    for (real v : {xi_x, xi_y, xi_z, eta_x, eta_y, eta_z, zeta_x, zeta_y, zeta_z})
      if (!std::isfinite(v)) return false;
    real s = scale();
    if (s == 0) return false;
    return std::abs(lu_det(as_matrix())) > kMetricTol * s * s * s;
  }

  void validate() const {
    require(is_valid(), "SingularMapping", "metric is singular or non-finite");
  }
};

struct MetricNorms {
  real norm_xi = 0, norm_eta = 0, norm_zeta = 0;
  real dot_xieta = 0, dot_xizeta = 0, dot_etazeta = 0;
  real psi2 = 0, psi3 = 0;  // psi2 omits xi_z, psi3 omits xi_y
};

inline MetricNorms compute_norms(const Metric& m) {
  MetricNorms n;
  n.norm_xi = std::sqrt(m.xi_x * m.xi_x + m.xi_y * m.xi_y + m.xi_z * m.xi_z);
  n.norm_eta = std::sqrt(m.eta_x * m.eta_x + m.eta_y * m.eta_y + m.eta_z * m.eta_z);
  n.norm_zeta =
      std::sqrt(m.zeta_x * m.zeta_x + m.zeta_y * m.zeta_y + m.zeta_z * m.zeta_z);
  n.dot_xieta = m.xi_x * m.eta_x + m.xi_y * m.eta_y + m.xi_z * m.eta_z;
  n.dot_xizeta = m.xi_x * m.zeta_x + m.xi_y * m.zeta_y + m.xi_z * m.zeta_z;
  n.dot_etazeta = m.eta_x * m.zeta_x + m.eta_y * m.zeta_y + m.eta_z * m.zeta_z;
  n.psi2 = std::sqrt(m.xi_x * m.xi_x + m.xi_y * m.xi_y);
  n.psi3 = std::sqrt(m.xi_x * m.xi_x + m.xi_z * m.xi_z);
  return n;
}

// Orthogonal-at-the-boundary predicate used by the well-posedness analysis:
// all three pairwise inner products vanish relative to the norm products.
inline bool is_orthogonal(const Metric& m) {
  MetricNorms n = compute_norms(m);
  return std::abs(n.dot_xieta) <= kMetricTol * n.norm_xi * n.norm_eta &&
         std::abs(n.dot_xizeta) <= kMetricTol * n.norm_xi * n.norm_zeta &&
         std::abs(n.dot_etazeta) <= kMetricTol * n.norm_eta * n.norm_zeta;
}

// Local mean state. The library default is the nondimensional convention
// (densities scaled by the mean density, velocities by the sound speed),
// in which rho_bar = c_bar = 1. Dimensional states are allowed anywhere a
// `mode` flag says so.
struct MeanFlow {
  real rho_bar = 1.0;
  real u_bar = 0.0, v_bar = 0.0, w_bar = 0.0;
  real p_bar = 1.0 / 1.4;
  real c_bar = 1.0;

  static MeanFlow nondimensional(real u, real v = 0.0, real w = 0.0) {
    MeanFlow f;
    f.u_bar = u;
    f.v_bar = v;
    f.w_bar = w;
    return f;
  }

  bool is_nondimensional() const {
    return std::abs(rho_bar - 1.0) <= 1e-14 && std::abs(c_bar - 1.0) <= 1e-14;
  }

  void validate() const {
    require(rho_bar > 0 && p_bar > 0 && c_bar > 0, "InvalidMeanFlow",
            "mean density, pressure and sound speed must be positive");
  }
};

struct ContravariantFlow {
  real U = 0, V = 0, W = 0;
};

inline ContravariantFlow contravariant(const Metric& m, const MeanFlow& flow) {
  ContravariantFlow c;
  c.U = m.xi_x * flow.u_bar + m.xi_y * flow.v_bar + m.xi_z * flow.w_bar;
  c.V = m.eta_x * flow.u_bar + m.eta_y * flow.v_bar + m.eta_z * flow.w_bar;
  c.W = m.zeta_x * flow.u_bar + m.zeta_y * flow.v_bar + m.zeta_z * flow.w_bar;
  return c;
}

// Subsonic in the boundary-normal sense: 0 < U < c|xi|.
inline bool is_subsonic_inflow(const Metric& m, const MeanFlow& flow) {
  ContravariantFlow c = contravariant(m, flow);
  MetricNorms n = compute_norms(m);
  return c.U > 0 && c.U < flow.c_bar * n.norm_xi;
}

}  // namespace curvibc
