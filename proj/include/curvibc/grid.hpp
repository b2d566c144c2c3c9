#pragma once

// Structured-grid support: analytic coordinate mappings with exact
// inverse-map derivatives, a plain-text node-coordinate reader, and
// finite-difference metric evaluation for grids that only exist as
// point sets.

#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "curvibc/core.hpp"
#include "curvibc/linalg.hpp"
#include "curvibc/metrics.hpp"

namespace curvibc {

struct GridDims {
  int ni = 2, nj = 2, nk = 2;
  long long count() const { return 1LL * ni * nj * nk; }
};

// k-fastest node ordering, matching the file format
inline long long node_index(const GridDims& d, int i, int j, int k) {
  return (1LL * i * d.nj + j) * d.nk + k;
}

struct MetricField {
  GridDims dims;
  std::vector<std::array<real, 3>> xyz;  // node coordinates
  std::vector<Metric> metric;            // inverse-map derivatives per node

  const Metric& at(int i, int j, int k) const {
    return metric[node_index(dims, i, j, k)];
  }
  const std::array<real, 3>& coord(int i, int j, int k) const {
    return xyz[node_index(dims, i, j, k)];
  }
};

using MappingParams = std::map<std::string, real>;

namespace detail {

inline real param(const MappingParams& p, const std::string& key, real fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace detail

// Analytic mapping: physical coordinates and the exact inverse-map
// derivative matrix as functions of the computational point
// (xi, eta, zeta) in [0,1]^3.
struct AnalyticMapping {
  std::string name;
  std::function<std::array<real, 3>(real, real, real)> position;
  std::function<Metric(real, real, real)> metric;
};

// Registry: identity, per-axis power-law stretching, constant-shear, and
// a cylindrical sector. Every mapping keeps the Jacobian bounded away
// from zero on the unit cube for valid parameters.
inline AnalyticMapping make_mapping(const std::string& name,
                                    const MappingParams& p = {}) {
  using detail::param;
  AnalyticMapping map;
  map.name = name;
  if (name == "identity") {
    real Lx = param(p, "lx", 1.0), Ly = param(p, "ly", 1.0), Lz = param(p, "lz", 1.0);
    require(Lx > 0 && Ly > 0 && Lz > 0, "SingularMapping", "identity needs positive lengths");
    map.position = [=](real xi, real eta, real zeta) {
      return std::array<real, 3>{Lx * xi, Ly * eta, Lz * zeta};
    };
    map.metric = [=](real, real, real) {
      Metric m;
      m.xi_x = 1 / Lx;
      m.eta_y = 1 / Ly;
      m.zeta_z = 1 / Lz;
      return m;
    };
  } else if (name == "stretched") {
    // x = Lx ((xi + c)^a - c^a) / ((1 + c)^a - c^a): power-law clustering
    // toward xi = 0, derivative bounded on [0,1] for c > 0
    real Lx = param(p, "lx", 1.0), Ly = param(p, "ly", 1.0), Lz = param(p, "lz", 1.0);
    real a = param(p, "exponent", 1.5), c = param(p, "offset", 0.25);
    require(a > 0 && c > 0, "SingularMapping",
            "stretched mapping needs exponent > 0 and offset > 0");
    auto stretch = [=](real s) {
      return (std::pow(s + c, a) - std::pow(c, a)) /
             (std::pow(1 + c, a) - std::pow(c, a));
    };
    auto dstretch = [=](real s) {
      return a * std::pow(s + c, a - 1) / (std::pow(1 + c, a) - std::pow(c, a));
    };
    map.position = [=](real xi, real eta, real zeta) {
      return std::array<real, 3>{Lx * stretch(xi), Ly * eta, Lz * zeta};
    };
    map.metric = [=](real xi, real, real) {
      Metric m;
      m.xi_x = 1 / (Lx * dstretch(xi));
      m.eta_y = 1 / Ly;
      m.zeta_z = 1 / Lz;
      return m;
    };
  } else if (name == "sheared") {
    // constant off-diagonal inverse-map entries: e.g. xi = x/lx + xi_y*y
    real Lx = param(p, "lx", 1.0), Ly = param(p, "ly", 1.0), Lz = param(p, "lz", 1.0);
    Metric cm;
    cm.xi_x = 1 / Lx;
    cm.eta_y = 1 / Ly;
    cm.zeta_z = 1 / Lz;
    cm.xi_y = param(p, "xi_y", 0.0);
    cm.xi_z = param(p, "xi_z", 0.0);
    cm.eta_x = param(p, "eta_x", 0.0);
    cm.eta_z = param(p, "eta_z", 0.0);
    cm.zeta_x = param(p, "zeta_x", 0.0);
    cm.zeta_y = param(p, "zeta_y", 0.0);
    require(cm.is_valid(), "SingularMapping", "shear coefficients make the metric singular");
    Mat3 inv = lu_inverse(cm.as_matrix(), "shear matrix");  // forward map columns
    map.position = [=](real xi, real eta, real zeta) {
      return std::array<real, 3>{
          inv(0, 0) * xi + inv(0, 1) * eta + inv(0, 2) * zeta,
          inv(1, 0) * xi + inv(1, 1) * eta + inv(1, 2) * zeta,
          inv(2, 0) * xi + inv(2, 1) * eta + inv(2, 2) * zeta};
    };
    map.metric = [=](real, real, real) { return cm; };
  } else if (name == "cylindrical-sector") {
    real r0 = param(p, "r0", 1.0), r1 = param(p, "r1", 2.0);
    real phi0 = param(p, "phi0", 0.0), phi1 = param(p, "phi1", 0.5);
    real Lz = param(p, "lz", 1.0);
    require(r0 > 0 && r1 > r0 && phi1 != phi0 && Lz > 0, "SingularMapping",
            "cylindrical sector needs 0 < r0 < r1 and a nonzero angle span");
    map.position = [=](real xi, real eta, real zeta) {
      real r = r0 + (r1 - r0) * xi;
      real phi = phi0 + (phi1 - phi0) * eta;
      return std::array<real, 3>{r * std::cos(phi), r * std::sin(phi), Lz * zeta};
    };
    map.metric = [=](real xi, real eta, real) {
      real r = r0 + (r1 - r0) * xi;
      real phi = phi0 + (phi1 - phi0) * eta;
      Metric m;
      m.xi_x = std::cos(phi) / (r1 - r0);
      m.xi_y = std::sin(phi) / (r1 - r0);
      m.xi_z = 0;
      m.eta_x = -std::sin(phi) / (r * (phi1 - phi0));
      m.eta_y = std::cos(phi) / (r * (phi1 - phi0));
      m.eta_z = 0;
      m.zeta_x = m.zeta_y = 0;
      m.zeta_z = 1 / Lz;
      return m;
    };
  } else {
    fail("UnknownMapping", "no mapping named '" + name + "'");
  }
  return map;
}

// Evaluate a mapping over a structured grid; every node metric must be
// nonsingular or the whole field is rejected.
inline MetricField analytic_mapping(const std::string& name, const MappingParams& p,
                                    const GridDims& dims) {
  AnalyticMapping map = make_mapping(name, p);
  require(dims.ni >= 2 && dims.nj >= 2 && dims.nk >= 2, "ConfigError",
          "grid needs at least two nodes per direction");
  MetricField f;
  f.dims = dims;
  f.xyz.resize(dims.count());
  f.metric.resize(dims.count());
  for (int i = 0; i < dims.ni; ++i)
    for (int j = 0; j < dims.nj; ++j)
      for (int k = 0; k < dims.nk; ++k) {
        real xi = real(i) / (dims.ni - 1);
        real eta = real(j) / (dims.nj - 1);
        real zeta = real(k) / (dims.nk - 1);
        long long idx = node_index(dims, i, j, k);
        f.xyz[idx] = map.position(xi, eta, zeta);
        Metric m = map.metric(xi, eta, zeta);
        require(m.is_valid(), "SingularMapping",
                "mapping '" + name + "' singular at a grid node");
        f.metric[idx] = m;
      }
  return f;
}

// ---------------------------------------------------------------------------
// Plain-text grid files: header "ni nj nk", then ni*nj*nk lines "x y z"
// in k-fastest order. Metrics are recovered by differencing the node
// coordinates: 4th-order central stencils inside, 4th-order one-sided at
// the edges, then inverting the forward Jacobian at each node.
// ---------------------------------------------------------------------------

namespace detail {

// 4th-order first-derivative stencils on a unit-spaced index line
inline real d4_line(const std::vector<real>& f, int n, int i) {
  auto v = [&](int idx) { return f[idx]; };
  if (i >= 2 && i <= n - 3)
    return (v(i - 2) - 8 * v(i - 1) + 8 * v(i + 1) - v(i + 2)) / 12.0;
  if (i == 0)
    return (-25 * v(0) + 48 * v(1) - 36 * v(2) + 16 * v(3) - 3 * v(4)) / 12.0;
  if (i == 1)
    return (-3 * v(0) - 10 * v(1) + 18 * v(2) - 6 * v(3) + v(4)) / 12.0;
  if (i == n - 2)
    return (3 * v(n - 1) + 10 * v(n - 2) - 18 * v(n - 3) + 6 * v(n - 4) - v(n - 5)) / 12.0;
  return (25 * v(n - 1) - 48 * v(n - 2) + 36 * v(n - 3) - 16 * v(n - 4) + 3 * v(n - 5)) / 12.0;
}

}  // namespace detail

inline MetricField metrics_from_nodes(const GridDims& dims,
                                      std::vector<std::array<real, 3>> xyz) {
  require(dims.ni >= 5 && dims.nj >= 5 && dims.nk >= 5, "ConfigError",
          "finite-difference metrics need at least 5 nodes per direction");
  require((long long)xyz.size() == dims.count(), "ConfigError",
          "node count does not match the header");
  MetricField f;
  f.dims = dims;
  f.xyz = std::move(xyz);
  f.metric.resize(dims.count());

  real dxi = 1.0 / (dims.ni - 1), deta = 1.0 / (dims.nj - 1), dzeta = 1.0 / (dims.nk - 1);
  std::vector<real> line;
  std::vector<std::array<real, 3>> dxdxi(f.xyz.size()), dxdeta(f.xyz.size()),
      dxdzeta(f.xyz.size());

  for (int c = 0; c < 3; ++c) {
    // xi direction
    line.assign(dims.ni, 0.0);
    for (int j = 0; j < dims.nj; ++j)
      for (int k = 0; k < dims.nk; ++k) {
        for (int i = 0; i < dims.ni; ++i) line[i] = f.xyz[node_index(dims, i, j, k)][c];
        for (int i = 0; i < dims.ni; ++i)
          dxdxi[node_index(dims, i, j, k)][c] = detail::d4_line(line, dims.ni, i) / dxi;
      }
    // eta direction
    line.assign(dims.nj, 0.0);
    for (int i = 0; i < dims.ni; ++i)
      for (int k = 0; k < dims.nk; ++k) {
        for (int j = 0; j < dims.nj; ++j) line[j] = f.xyz[node_index(dims, i, j, k)][c];
        for (int j = 0; j < dims.nj; ++j)
          dxdeta[node_index(dims, i, j, k)][c] = detail::d4_line(line, dims.nj, j) / deta;
      }
    // zeta direction
    line.assign(dims.nk, 0.0);
    for (int i = 0; i < dims.ni; ++i)
      for (int j = 0; j < dims.nj; ++j) {
        for (int k = 0; k < dims.nk; ++k) line[k] = f.xyz[node_index(dims, i, j, k)][c];
        for (int k = 0; k < dims.nk; ++k)
          dxdzeta[node_index(dims, i, j, k)][c] = detail::d4_line(line, dims.nk, k) / dzeta;
      }
  }

  for (long long idx = 0; idx < dims.count(); ++idx) {
    Mat3 J;  // forward Jacobian, columns d(x)/d(xi_j)
    for (int c = 0; c < 3; ++c) {
      J(c, 0) = dxdxi[idx][c];
      J(c, 1) = dxdeta[idx][c];
      J(c, 2) = dxdzeta[idx][c];
    }
    real det = lu_det(J);
    require(std::abs(det) > 1e-12, "SingularMapping",
            "grid Jacobian singular at node " + std::to_string(idx));
    Mat3 inv = lu_inverse(J, "forward Jacobian");
    Metric& m = f.metric[idx];
    m.xi_x = inv(0, 0);  m.xi_y = inv(0, 1);  m.xi_z = inv(0, 2);
    m.eta_x = inv(1, 0); m.eta_y = inv(1, 1); m.eta_z = inv(1, 2);
    m.zeta_x = inv(2, 0); m.zeta_y = inv(2, 1); m.zeta_z = inv(2, 2);
  }
  return f;
}

inline MetricField read_grid_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "ConfigError", "cannot open grid file '" + path + "'");
  GridDims dims;
  in >> dims.ni >> dims.nj >> dims.nk;
  require(in.good() && dims.ni >= 2 && dims.nj >= 2 && dims.nk >= 2, "ConfigError",
          "bad grid header in '" + path + "'");
  std::vector<std::array<real, 3>> xyz(dims.count());
  for (long long n = 0; n < dims.count(); ++n) {
    in >> xyz[n][0] >> xyz[n][1] >> xyz[n][2];
    require(!in.fail(), "ConfigError",
            "grid file '" + path + "' truncated at node " + std::to_string(n));
  }
  return metrics_from_nodes(dims, std::move(xyz));
}

inline void write_grid_file(const std::string& path, const MetricField& f) {
  std::ofstream out(path);
  require(out.good(), "ConfigError", "cannot write grid file '" + path + "'");
  out.precision(17);
  out << f.dims.ni << " " << f.dims.nj << " " << f.dims.nk << "\n";
  for (const auto& p : f.xyz) out << p[0] << " " << p[1] << " " << p[2] << "\n";
}

}  // namespace curvibc
