#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "curvibc/grid.hpp"

using namespace curvibc;

TEST_CASE("identity mapping reproduces the cartesian metric everywhere") {
  MetricField f = analytic_mapping("identity", {}, {6, 5, 5});
  for (const Metric& m : f.metric) {
    CHECK(m.xi_x == 1.0);
    CHECK(m.eta_y == 1.0);
    CHECK(m.zeta_z == 1.0);
    CHECK(m.xi_y == 0.0);
    CHECK(m.eta_x == 0.0);
  }
  CHECK(f.coord(5, 0, 0)[0] == doctest::Approx(1.0));
}

TEST_CASE("sheared mapping gives a constant off-diagonal metric") {
  MetricField f = analytic_mapping("sheared", {{"xi_y", 0.2}}, {5, 5, 5});
  for (const Metric& m : f.metric) {
    CHECK(m.xi_y == doctest::Approx(0.2));
    CHECK(m.xi_x == doctest::Approx(1.0));
    CHECK(m.eta_y == doctest::Approx(1.0));
  }
  // the node positions invert the map: xi = x + 0.2 y
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      auto p = f.coord(i, j, 0);
      real xi = p[0] * 1.0 + 0.2 * p[1];
      CHECK(xi == doctest::Approx(real(i) / 4));
    }
}

TEST_CASE("cylindrical sector is orthogonal with 1/r azimuthal scaling") {
  MetricField f =
      analytic_mapping("cylindrical-sector", {{"r0", 1.0}, {"r1", 2.0}}, {5, 5, 5});
  for (const Metric& m : f.metric) {
    CHECK(is_orthogonal(m));
    MetricNorms n = compute_norms(m);
    CHECK(n.norm_xi == doctest::Approx(1.0));  // 1/(r1-r0)
  }
  MetricNorms inner = compute_norms(f.at(0, 2, 2));
  MetricNorms outer = compute_norms(f.at(4, 2, 2));
  CHECK(inner.norm_eta == doctest::Approx(2.0 * outer.norm_eta).epsilon(1e-12));
}

TEST_CASE("unknown and singular mappings are rejected") {
  CHECK_THROWS_AS(analytic_mapping("moebius", {}, {5, 5, 5}), Error);
  CHECK_THROWS_AS(analytic_mapping("identity", {{"lx", 0.0}}, {5, 5, 5}), Error);
  CHECK_THROWS_AS(analytic_mapping("stretched", {{"offset", -1.0}}, {5, 5, 5}), Error);
}

TEST_CASE("stretched mapping against finite differences of the position") {
  MappingParams p{{"exponent", 1.6}, {"offset", 0.3}, {"lx", 2.0}};
  AnalyticMapping map = make_mapping("stretched", p);
  // central-difference the forward map in xi and compare 1/x_xi with the
  // analytic metric; agreement is second order in the step
  real errs[2];
  int idx = 0;
  for (real h : {1e-3, 5e-4}) {
    real worst = 0;
    for (real xi : {0.2, 0.5, 0.8}) {
      real xp = map.position(xi + h, 0.4, 0.6)[0];
      real xm = map.position(xi - h, 0.4, 0.6)[0];
      real fd = 1.0 / ((xp - xm) / (2 * h));
      real an = map.metric(xi, 0.4, 0.6).xi_x;
      worst = std::max(worst, std::abs(fd - an) / std::abs(an));
    }
    errs[idx++] = worst;
  }
  CHECK(errs[0] <= 1e-5);
  CHECK(errs[1] <= errs[0] / 2.5);  // ~O(h^2) decay
}

TEST_CASE("grid file round trip and finite-difference metrics") {
  // write a sheared grid to the plain-text format, read it back, and
  // recover the constant metric by differencing
  GridDims dims{9, 8, 7};
  MetricField f = analytic_mapping("sheared", {{"xi_y", 0.2}, {"lx", 2.0}}, dims);
  std::string path = (std::filesystem::temp_directory_path() / "curvibc_grid.txt").string();
  write_grid_file(path, f);
  MetricField g = read_grid_file(path);
  std::remove(path.c_str());

  CHECK(g.dims.ni == 9);
  CHECK(g.dims.nj == 8);
  CHECK(g.dims.nk == 7);
  for (int i = 0; i < dims.ni; ++i)
    for (int j = 0; j < dims.nj; ++j)
      for (int k = 0; k < dims.nk; ++k) {
        const Metric& m = g.at(i, j, k);
        // affine map: 4th-order differences are exact to roundoff
        CHECK(m.xi_x == doctest::Approx(0.5).epsilon(1e-11));
        CHECK(m.xi_y == doctest::Approx(0.2).epsilon(1e-10));
        CHECK(m.eta_y == doctest::Approx(1.0).epsilon(1e-11));
      }

  // a curved grid: the cylindrical sector, interior nodes 4th-order
  GridDims cd{17, 17, 5};
  MetricField c = analytic_mapping("cylindrical-sector", {{"r0", 1.0}, {"r1", 2.0}}, cd);
  write_grid_file(path, c);
  MetricField cfd = read_grid_file(path);
  std::remove(path.c_str());
  real worst = 0;
  for (int i = 4; i < cd.ni - 4; ++i)
    for (int j = 4; j < cd.nj - 4; ++j) {
      const Metric& a = c.at(i, j, 2);
      const Metric& b = cfd.at(i, j, 2);
      worst = std::max(worst, std::abs(a.eta_x - b.eta_x));
      worst = std::max(worst, std::abs(a.eta_y - b.eta_y));
    }
  CHECK(worst <= 2e-5);  // h^4 at 16 intervals over the sector

  // truncated files are rejected
  {
    std::ofstream out(path);
    out << "4 4 4\n0 0 0\n1 0 0\n";
  }
  CHECK_THROWS_AS(read_grid_file(path), Error);
  std::remove(path.c_str());
}
