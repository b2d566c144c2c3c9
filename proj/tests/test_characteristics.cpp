#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "curvibc/characteristics.hpp"
#include "curvibc/sampling.hpp"

using namespace curvibc;

TEST_CASE("cartesian transform is the published integer pair") {
  CharTransform t = build_transform(Metric::cartesian(), MeanFlow::nondimensional(0.5));

  const real T[5][5] = {{-1, 0, 0, 0, 1},
                        {0, 0, 1, 0, 0},
                        {0, 0, 0, 1, 0},
                        {0, 1, 0, 0, 1},
                        {0, -1, 0, 0, 1}};
  const real F[5][5] = {{-1, 0, 0, 0.5, 0.5},
                        {0, 0, 0, 0.5, -0.5},
                        {0, 1, 0, 0, 0},
                        {0, 0, 1, 0, 0},
                        {0, 0, 0, 0.5, 0.5}};
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      CHECK(t.to_char(r, c) == T[r][c]);
      CHECK(t.from_char(r, c) == F[r][c]);
    }
  CHECK(matmul(t.from_char, t.to_char) == Mat5::identity());

  // published row arithmetic: q = (0,1,0,0,1) -> c = (1,0,0,2,0)
  CharacteristicState c = to_characteristics(t, {0, 1, 0, 0, 1});
  CHECK(c.c1 == 1.0);
  CHECK(c.c2 == 0.0);
  CHECK(c.c3 == 0.0);
  CHECK(c.c4 == 2.0);
  CHECK(c.c5 == 0.0);

  CharacteristicState z = to_characteristics(t, {});
  CHECK(z.as_vec() == Vec5{});
}

TEST_CASE("dimensional transform carries the density and sound-speed factors") {
  MeanFlow dim;
  dim.rho_bar = 1.2;
  dim.c_bar = 340.0;
  dim.u_bar = 170.0;
  dim.p_bar = 1.2 * 340.0 * 340.0 / 1.4;
  CharTransform t = build_transform(Metric::cartesian(), dim, UnitMode::dimensional);
  real rc = dim.rho_bar * dim.c_bar, c2 = dim.c_bar * dim.c_bar;
  CHECK(t.to_char(0, 0) == doctest::Approx(-c2));
  CHECK(t.to_char(0, 4) == doctest::Approx(1.0));
  CHECK(t.to_char(3, 1) == doctest::Approx(rc));
  CHECK(t.to_char(1, 2) == doctest::Approx(rc));
  CHECK(t.from_char(0, 0) == doctest::Approx(-1.0 / c2));
  CHECK(t.from_char(1, 3) == doctest::Approx(1.0 / (2 * rc)));
  CHECK(t.from_char(1, 4) == doctest::Approx(-1.0 / (2 * rc)));
  CHECK(t.from_char(4, 3) == doctest::Approx(0.5));

  // nondimensional state reproduces the nondimensional matrices exactly
  MeanFlow unit = MeanFlow::nondimensional(0.5);
  CharTransform a = build_transform(Metric::cartesian(), unit);
  CharTransform b = build_transform(Metric::cartesian(), unit, UnitMode::dimensional);
  CHECK(a.to_char == b.to_char);
  CHECK(a.from_char == b.from_char);

  // round trip through dimensional characteristics
  Rng rng(3);
  CharTransform te = build_transform(Metric::cartesian(), dim, UnitMode::dimensional,
                                     Reconstruction::exact_inverse);
  for (int s = 0; s < 50; ++s) {
    Perturbation q{rng.uniform(-1, 1), rng.uniform(-30, 30), rng.uniform(-30, 30),
                   rng.uniform(-30, 30), rng.uniform(-1e4, 1e4)};
    Perturbation back = from_characteristics(te, to_characteristics(te, q));
    CHECK(max_abs(back.as_vec() - q.as_vec()) <= 1e-10 * 1e4);
  }
}

TEST_CASE("round trip and reconstruction modes on general metrics") {
  Rng rng(4);
  for (int s = 0; s < 300; ++s) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    CharTransform modal = build_transform(m, f);
    CharTransform exact =
        build_transform(m, f, UnitMode::nondimensional, Reconstruction::exact_inverse);
    Mat5 inv = lu_inverse(modal.to_char, "to_char");
    CHECK(max_abs(exact.from_char - inv) <= 1e-12 * max_abs(inv));
    if (std::abs(m.xi_y * m.xi_z) <= 1e-14)
      CHECK(max_abs(modal.from_char - inv) <= 1e-12 * max_abs(inv));

    Perturbation q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                   rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Perturbation back = from_characteristics(exact, to_characteristics(exact, q));
    CHECK(max_abs(back.as_vec() - q.as_vec()) <= 1e-13);
  }
}

TEST_CASE("first-order projections") {
  Metric m = Metric::cartesian();
  MeanFlow f = MeanFlow::nondimensional(0.5);
  CharTransform t = build_transform(m, f);

  // inflow zeroes the four incoming amplitudes
  Perturbation q{0.3, -0.2, 0.7, 0.1, -0.4};
  Perturbation in = apply_inflow_1d(t, q);
  CharacteristicState c = to_characteristics(t, in);
  CHECK(std::abs(c.c1) <= 1e-14);
  CHECK(std::abs(c.c2) <= 1e-14);
  CHECK(std::abs(c.c3) <= 1e-14);
  CHECK(std::abs(c.c4) <= 1e-14);

  // outflow: c5 of (0,1,0,0,1) is already zero, the state is untouched
  Perturbation u{0, 1, 0, 0, 1};
  Perturbation out = apply_outflow_1d(t, u);
  CHECK(max_abs(out.as_vec() - u.as_vec()) <= 1e-15);

  // outflow on a pure pressure state: published arithmetic gives
  // (-0.5, 0.5, 0, 0, 0.5)
  Perturbation p{0, 0, 0, 0, 1};
  Perturbation po = apply_outflow_1d(t, p);
  CHECK(po.rho == doctest::Approx(-0.5));
  CHECK(po.u == doctest::Approx(0.5));
  CHECK(po.v == doctest::Approx(0.0));
  CHECK(po.w == doctest::Approx(0.0));
  CHECK(po.p == doctest::Approx(0.5));

  // idempotence on general metrics with the exact-inverse reconstruction
  Rng rng(5);
  for (int s = 0; s < 200; ++s) {
    Metric mm = random_metric(rng);
    MeanFlow ff = random_subsonic_flow(rng, mm);
    CharTransform te =
        build_transform(mm, ff, UnitMode::nondimensional, Reconstruction::exact_inverse);
    Perturbation qq{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                    rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Perturbation once = apply_outflow_1d(te, qq);
    CHECK(max_abs(apply_outflow_1d(te, once).as_vec() - once.as_vec()) <= 1e-13);
    once = apply_inflow_1d(te, qq);
    CHECK(max_abs(apply_inflow_1d(te, once).as_vec() - once.as_vec()) <= 1e-13);
  }
}
