#pragma once

// One-dimensional characteristic transform at a xi-boundary and the
// first-order nonreflecting conditions built on it: transform, zero the
// incoming amplitudes, transform back.

#include "curvibc/core.hpp"
#include "curvibc/eigenvectors.hpp"
#include "curvibc/linalg.hpp"
#include "curvibc/metrics.hpp"

namespace curvibc {

struct Perturbation {
  real rho = 0, u = 0, v = 0, w = 0, p = 0;

  Vec5 as_vec() const {
    Vec5 q;
    q(0, 0) = rho; q(1, 0) = u; q(2, 0) = v; q(3, 0) = w; q(4, 0) = p;
    return q;
  }
  static Perturbation from_vec(const Vec5& q) {
    return {q(0, 0), q(1, 0), q(2, 0), q(3, 0), q(4, 0)};
  }
};

struct CharacteristicState {
  real c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;

  Vec5 as_vec() const {
    Vec5 c;
    c(0, 0) = c1; c(1, 0) = c2; c(2, 0) = c3; c(3, 0) = c4; c(4, 0) = c5;
    return c;
  }
  static CharacteristicState from_vec(const Vec5& c) {
    return {c(0, 0), c(1, 0), c(2, 0), c(3, 0), c(4, 0)};
  }
};

enum class UnitMode { nondimensional, dimensional };

// The reconstruction matrix is either the modal one (columns are the
// w_n^R, the classical tabulated form) or the numeric inverse of the
// forward transform. They differ when xi_y * xi_z != 0, so reports must
// say which one produced a number.
enum class Reconstruction { modal, exact_inverse };

struct CharTransform {
  Mat5 to_char;    // rows w_1..5^L
  Mat5 from_char;  // modal columns, or the numeric inverse of to_char
  UnitMode mode = UnitMode::nondimensional;
  Reconstruction reconstruction = Reconstruction::modal;
};

namespace detail {

// Variable scaling between nondimensional and dimensional perturbations:
// rho' by rho_bar, velocities by c_bar, p' by rho_bar c_bar^2. Dimensional
// transform rows are the nondimensional ones conjugated by this scaling
// (and normalized by rho_bar c_bar^2, which reproduces the published
// dimensional tables entry for entry).
inline Vec5 unit_scaling(const MeanFlow& f) {
  Vec5 s;
  s(0, 0) = f.rho_bar;
  s(1, 0) = s(2, 0) = s(3, 0) = f.c_bar;
  s(4, 0) = f.rho_bar * f.c_bar * f.c_bar;
  return s;
}

}  // namespace detail

inline CharTransform build_transform(const Metric& m, const MeanFlow& flow,
                                     UnitMode mode = UnitMode::nondimensional,
                                     Reconstruction rec = Reconstruction::modal) {
  m.validate();
  flow.validate();
  LimitVectors w = limit_vectors(m, flow);

  CharTransform t;
  t.mode = mode;
  t.reconstruction = rec;
  for (int n = 0; n < 5; ++n)
    for (int j = 0; j < 5; ++j) {
      t.to_char(n, j) = w.left[n](j, 0);
      t.from_char(j, n) = w.right[n](j, 0);
    }

  if (mode == UnitMode::dimensional) {
    Vec5 s = detail::unit_scaling(flow);
    real row_norm = flow.rho_bar * flow.c_bar * flow.c_bar;
    for (int n = 0; n < 5; ++n)
      for (int j = 0; j < 5; ++j) {
        t.to_char(n, j) *= row_norm / s(j, 0);
        t.from_char(j, n) *= s(j, 0) / row_norm;
      }
  }

  if (rec == Reconstruction::exact_inverse)
    t.from_char = lu_inverse(t.to_char, "characteristic transform");
  return t;
}

inline CharacteristicState to_characteristics(const CharTransform& t,
                                              const Perturbation& q) {
  return CharacteristicState::from_vec(matmul(t.to_char, q.as_vec()));
}

inline Perturbation from_characteristics(const CharTransform& t,
                                         const CharacteristicState& c) {
  return Perturbation::from_vec(matmul(t.from_char, c.as_vec()));
}

namespace detail {

inline Perturbation project(const CharTransform& t, const Perturbation& q,
                            bool keep[5]) {
  Vec5 c = matmul(t.to_char, q.as_vec());
  for (int n = 0; n < 5; ++n)
    if (!keep[n]) c(n, 0) = 0;
  return Perturbation::from_vec(matmul(t.from_char, c));
}

}  // namespace detail

// Inflow: amplitudes 1..4 enter the domain and are set to zero, the
// outgoing acoustic amplitude is kept.
inline Perturbation apply_inflow_1d(const CharTransform& t, const Perturbation& q) {
  bool keep[5] = {false, false, false, false, true};
  return detail::project(t, q, keep);
}

// Outflow: only the upstream acoustic amplitude enters and is zeroed.
inline Perturbation apply_outflow_1d(const CharTransform& t, const Perturbation& q) {
  bool keep[5] = {true, true, true, true, false};
  return detail::project(t, q, keep);
}

}  // namespace curvibc
