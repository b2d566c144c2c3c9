#pragma once

// Small fixed-size dense linear algebra. Everything in this project is
// 3x3, 4x4 or 5x5, so a flat std::array with no allocation is the right
// tool; dense storage also keeps oracle comparisons entrywise-trivial.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <type_traits>

#include "curvibc/core.hpp"

namespace curvibc {

template <class T, int R, int C>
struct Mat {
  std::array<T, R * C> a{};

  static constexpr int rows = R;
  static constexpr int cols = C;

  T& operator()(int r, int c) { return a[r * C + c]; }
  const T& operator()(int r, int c) const { return a[r * C + c]; }

  static Mat zero() { return Mat{}; }

  static Mat identity() {
    static_assert(R == C);
    Mat m;
    for (int i = 0; i < R; ++i) m(i, i) = T(1);
    return m;
  }

  Mat& operator+=(const Mat& o) {
    for (int i = 0; i < R * C; ++i) a[i] += o.a[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (int i = 0; i < R * C; ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat& operator*=(T s) {
    for (auto& v : a) v *= s;
    return *this;
  }

  friend Mat operator+(Mat x, const Mat& y) { return x += y; }
  friend Mat operator-(Mat x, const Mat& y) { return x -= y; }
  friend Mat operator*(T s, Mat x) { return x *= s; }
  friend Mat operator*(Mat x, T s) { return x *= s; }

  friend bool operator==(const Mat& x, const Mat& y) { return x.a == y.a; }
};

template <class T, int N>
using Vec = Mat<T, N, 1>;

template <class T, int N>
T& at(Vec<T, N>& v, int i) {
  return v(i, 0);
}

using Vec3 = Vec<real, 3>;
using Mat3 = Mat<real, 3, 3>;
using Vec5 = Vec<real, 5>;
using Mat5 = Mat<real, 5, 5>;
using CVec5 = Vec<cplx, 5>;
using CMat5 = Mat<cplx, 5, 5>;
using CMat4 = Mat<cplx, 4, 4>;

template <class T, int R, int K, int C>
Mat<T, R, C> matmul(const Mat<T, R, K>& x, const Mat<T, K, C>& y) {
  Mat<T, R, C> out;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      T s{};
      for (int k = 0; k < K; ++k) s += x(r, k) * y(k, c);
      out(r, c) = s;
    }
  return out;
}

template <class T, int N>
T dot(const Vec<T, N>& x, const Vec<T, N>& y) {
  T s{};
  for (int i = 0; i < N; ++i) s += x(i, 0) * y(i, 0);
  return s;
}

// row-vector times matrix, returned as a vector of length C
template <class T, int R, int C>
Vec<T, C> row_times(const Vec<T, R>& row, const Mat<T, R, C>& m) {
  Vec<T, C> out;
  for (int c = 0; c < C; ++c) {
    T s{};
    for (int r = 0; r < R; ++r) s += row(r, 0) * m(r, c);
    out(c, 0) = s;
  }
  return out;
}

template <class T, int R, int C>
real max_abs(const Mat<T, R, C>& m) {
  real mx = 0;
  for (const auto& v : m.a) mx = std::max(mx, static_cast<real>(std::abs(v)));
  return mx;
}

template <int R, int C>
Mat<cplx, R, C> to_complex(const Mat<real, R, C>& m) {
  Mat<cplx, R, C> out;
  for (int i = 0; i < R * C; ++i) out.a[i] = cplx(m.a[i], 0.0);
  return out;
}

template <int R, int C>
Mat<real, R, C> real_part(const Mat<cplx, R, C>& m) {
  Mat<real, R, C> out;
  for (int i = 0; i < R * C; ++i) out.a[i] = m.a[i].real();
  return out;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting: determinant, solve, inverse
// ---------------------------------------------------------------------------

template <class T, int N>
struct Lu {
  Mat<T, N, N> lu;
  std::array<int, N> perm{};
  int sign = 1;
  bool singular = false;
};

template <class T, int N>
Lu<T, N> lu_factor(Mat<T, N, N> m, real pivot_floor = 0.0) {
  Lu<T, N> f;
  for (int i = 0; i < N; ++i) f.perm[i] = i;
  for (int col = 0; col < N; ++col) {
    int piv = col;
    real best = std::abs(m(col, col));
    for (int r = col + 1; r < N; ++r)
      if (std::abs(m(r, col)) > best) {
        best = std::abs(m(r, col));
        piv = r;
      }
    if (best <= pivot_floor) {
      f.singular = true;
    }
    if (piv != col) {
      for (int c = 0; c < N; ++c) std::swap(m(piv, c), m(col, c));
      std::swap(f.perm[piv], f.perm[col]);
      f.sign = -f.sign;
    }
    if (std::abs(m(col, col)) == real(0)) continue;
    for (int r = col + 1; r < N; ++r) {
      T factor = m(r, col) / m(col, col);
      m(r, col) = factor;
      for (int c = col + 1; c < N; ++c) m(r, c) -= factor * m(col, c);
    }
  }
  f.lu = m;
  return f;
}

template <class T, int N>
T lu_det(const Mat<T, N, N>& m) {
  auto f = lu_factor(m);
  T d = T(f.sign);
  for (int i = 0; i < N; ++i) d *= f.lu(i, i);
  return d;
}

template <class T, int N>
Vec<T, N> lu_solve(const Lu<T, N>& f, const Vec<T, N>& b) {
  Vec<T, N> x;
  // apply permutation, forward substitution
  for (int i = 0; i < N; ++i) x(i, 0) = b(f.perm[i], 0);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < i; ++j) x(i, 0) -= f.lu(i, j) * x(j, 0);
  // back substitution
  for (int i = N - 1; i >= 0; --i) {
    for (int j = i + 1; j < N; ++j) x(i, 0) -= f.lu(i, j) * x(j, 0);
    x(i, 0) /= f.lu(i, i);
  }
  return x;
}

template <class T, int N>
Mat<T, N, N> lu_inverse(const Mat<T, N, N>& m, const char* what = "matrix") {
  auto f = lu_factor(m);
  require(!f.singular, "SingularMatrix", std::string("cannot invert ") + what);
  Mat<T, N, N> inv;
  for (int c = 0; c < N; ++c) {
    Vec<T, N> e;
    e(c, 0) = T(1);
    auto x = lu_solve(f, e);
    for (int r = 0; r < N; ++r) inv(r, c) = x(r, 0);
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Singular values by one-sided Jacobi (Hestenes). Works for real and
// complex entries; sizes here are tiny so sweeps to convergence are cheap.
// ---------------------------------------------------------------------------

template <class T, int R, int C>
std::array<real, C> singular_values(Mat<T, R, C> m) {
  static_assert(R >= C);
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < C - 1; ++p)
      for (int q = p + 1; q < C; ++q) {
        real app = 0, aqq = 0;
        T apq{};
        for (int r = 0; r < R; ++r) {
          app += std::norm(cplx(m(r, p)));
          aqq += std::norm(cplx(m(r, q)));
          if constexpr (std::is_same_v<T, cplx>)
            apq += std::conj(m(r, p)) * m(r, q);
          else
            apq += m(r, p) * m(r, q);
        }
        real absapq = std::abs(cplx(apq));
        if (absapq <= 1e-300 || absapq * absapq <= 1e-60 * app * aqq) continue;
        rotated = true;
        // phase-align column q, then apply the real 2x2 rotation
        T phase;
        if constexpr (std::is_same_v<T, cplx>)
          phase = apq / absapq;
        else
          phase = apq >= 0 ? T(1) : T(-1);
        real tau = (aqq - app) / (2 * absapq);
        real t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        real c = 1 / std::sqrt(1 + t * t);
        real s = c * t;
        for (int r = 0; r < R; ++r) {
          T vp = m(r, p), vq = m(r, q);
          T conj_phase;
          if constexpr (std::is_same_v<T, cplx>)
            conj_phase = std::conj(phase);
          else
            conj_phase = phase;
          m(r, p) = c * vp - s * conj_phase * vq;
          m(r, q) = s * phase * vp + c * vq;
        }
      }
    if (!rotated) break;
  }
  std::array<real, C> sv{};
  for (int cidx = 0; cidx < C; ++cidx) {
    real n2 = 0;
    for (int r = 0; r < R; ++r) n2 += std::norm(cplx(m(r, cidx)));
    sv[cidx] = std::sqrt(n2);
  }
  std::sort(sv.begin(), sv.end(), std::greater<real>());
  return sv;
}

template <class T, int N>
int numeric_rank(const Mat<T, N, N>& m, real rel_threshold = 1e-8) {
  auto sv = singular_values(m);
  if (sv[0] == 0) return 0;
  int r = 0;
  for (real s : sv)
    if (s > rel_threshold * sv[0]) ++r;
  return r;
}

inline real condition_number(const Mat3& m) {
  auto sv = singular_values(m);
  return sv[2] > 0 ? sv[0] / sv[2] : std::numeric_limits<real>::infinity();
}

}  // namespace curvibc
