// Acceptance suite: ten numbered criteria, one verdict line each, every
// tolerance pinned in code. Exit status is nonzero if any criterion
// fails; failures print the measured values so the log stands alone.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <vector>

#include "curvibc/sampling.hpp"
#include "curvibc/sim.hpp"
#include "curvibc/verify.hpp"
#include "curvibc/wellposedness.hpp"
#include "oracle.hpp"

using namespace curvibc;

namespace {

int failures = 0;

void verdict(int criterion, bool pass, const std::string& what,
             const std::string& detail) {
  std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// shared sample set for criteria 1-3 and 5
struct Sample {
  Metric m;
  MeanFlow f;
  real l, m_wn, omega;
};

std::vector<Sample> draw_samples(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<Sample> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    Sample smp;
    smp.m = random_metric(rng, 10.0);
    smp.f = random_subsonic_flow(rng, smp.m);
    smp.omega = rng.uniform(0.5, 2.0);
    smp.l = rng.uniform(-0.3, 0.3) * smp.omega;
    smp.m_wn = rng.uniform(-0.3, 0.3) * smp.omega;
    out.push_back(smp);
  }
  return out;
}

void criterion_1_2(const std::vector<Sample>& samples) {
  auto t0 = std::chrono::steady_clock::now();
  real worst_root = 0;
  for (const auto& s : samples) {
    RootSet rs = roots_k(s.m, s.f, s.l, s.m_wn, s.omega);
    real node_scale =
        std::max({std::abs(rs.k[0]), std::abs(rs.k[3]), std::abs(rs.k[4]), 1.0});
    auto numeric = oracle::roots_of_sampled_quintic(
        [&](cplx k) {
          return oracle::cofactor_det(
              dispersion_matrix(s.m, s.f, {k, s.l, s.m_wn, s.omega}).M);
        },
        node_scale);
    std::vector<cplx> closed(rs.k.begin(), rs.k.end());
    worst_root =
        std::max(worst_root, oracle::best_cluster_match_error(closed, numeric,
                                                              node_scale));
  }
  double dt = seconds_since(t0);
  verdict(1, worst_root <= 1e-9 && dt < 10.0,
          "closed-form k-roots match the numeric polynomial oracle",
          fmt("max rel err %.2e (tol 1e-9), %d samples, %.1f s", worst_root,
              (int)samples.size(), dt));

  real worst_det = 0;
  Rng rng(1234);
  for (const auto& s : samples) {
    WaveVector w{cplx(rng.uniform(-2, 2), rng.uniform(-1, 1)), s.l, s.m_wn,
                 cplx(s.omega, rng.uniform(0, 1))};
    DispersionMatrix d = dispersion_matrix(s.m, s.f, w);
    cplx ref = oracle::cofactor_det(d.M);
    worst_det = std::max(worst_det, std::abs(dispersion_determinant(d) - ref) /
                                        std::max({std::abs(ref), real(1)}));
  }
  verdict(2, worst_det <= 1e-10, "factored determinant equals the 5x5 determinant",
          fmt("max rel err %.2e (tol 1e-10)", worst_det));
}

void criterion_3(const std::vector<Sample>& samples) {
  real worst_res = 0, worst_diag = 0, worst_off = 0, worst_w23 = 0;
  Rng rng(99);
  for (const auto& s : samples) {
    LambdaPair lp{s.l / s.omega, s.m_wn / s.omega};
    for (int n = 1; n <= 5; ++n) {
      cplx k = (n <= 3) ? k_star_convected(s.m, s.f, lp) : k_star(n, s.m, s.f, lp);
      DispersionMatrix d =
          dispersion_matrix(s.m, s.f, {k * s.omega, s.l, s.m_wn, s.omega});
      CVec5 r = right_eigenvector(n, s.m, s.f, lp);
      CVec5 le = left_eigenvector(n, s.m, s.f, lp);
      worst_res = std::max(worst_res,
                           max_abs(matmul(d.M, r)) / (max_abs(d.M) * max_abs(r)));
      worst_res = std::max(worst_res,
                           max_abs(row_times(le, d.M)) / (max_abs(d.M) * max_abs(le)));
    }
    LimitVectors w = limit_vectors(s.m, s.f);
    MetricNorms nm = compute_norms(s.m);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        real prod = dot(w.left[a], w.right[b]);
        if (a == b)
          worst_diag = std::max(worst_diag, std::abs(prod - 1.0));
        else if (a == 1 && b == 2)
          worst_w23 =
              std::max(worst_w23, std::abs(prod - s.m.xi_y * s.m.xi_z / sq(nm.psi3)));
        else if (a == 2 && b == 1)
          continue;  // mirror deviation, same mechanism
        else
          worst_off = std::max(worst_off, std::abs(prod));
      }
  }
  bool pass = worst_res <= 1e-10 && worst_diag <= 1e-12 && worst_off <= 1e-12 &&
              worst_w23 <= 1e-12;
  verdict(3, pass, "eigenvector kernel residuals and limit biorthonormality",
          fmt("residual %.2e, diag %.2e, off-diag %.2e, w2L.w3R dev %.2e", worst_res,
              worst_diag, worst_off, worst_w23));
}

void criterion_4() {
  bool ok = true;
  std::string note;

  // transform pair reduces to the published integer matrices
  {
    CharTransform t =
        build_transform(Metric::cartesian(), MeanFlow::nondimensional(0.5));
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
      for (int c = 0; c < 5; ++c)
        ok = ok && t.to_char(r, c) == T[r][c] && t.from_char(r, c) == F[r][c];
    if (!ok) note = "transform tables differ";
  }

  // quasi-3D tables reduce to the cartesian tables exactly (with the
  // pressure-gradient entry the published reduction dropped)
  {
    real ub = 0.5, vb = 0.25, wb = 0.125;
    MeanFlow f = MeanFlow::nondimensional(ub, vb, wb);
    BCOperator in = build_quasi3d(Metric::cartesian(), f, Side::inflow);
    BCOperator out = build_quasi3d(Metric::cartesian(), f, Side::outflow);
    const real Gy[4][5] = {{0, 0, 0, 0, 0},
                           {0, ub, vb, 0, 1},
                           {0, 0, 0, vb, 0},
                           {0, vb, -ub, 0, vb}};
    const real Hz[4][5] = {{0, 0, 0, 0, 0},
                           {0, 0, wb, 0, 0},
                           {0, ub, 0, wb, 1},
                           {0, wb, 0, -ub, wb}};
    const real G5[5] = {0, -vb, ub, 0, vb};
    const real H5[5] = {0, -wb, 0, ub, wb};
    bool tq = true;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 5; ++c)
        tq = tq && in.G[r](c, 0) == Gy[r][c] && in.H[r](c, 0) == Hz[r][c];
    for (int c = 0; c < 5; ++c)
      tq = tq && out.G[0](c, 0) == G5[c] && out.H[0](c, 0) == H5[c];
    ok = ok && tq;
    if (!tq) note += " quasi-3D tables differ";
  }

  // cartesian correction coefficients
  {
    ModCoefficients c =
        compute_m(Metric::cartesian(), MeanFlow::nondimensional(0.5), MPath::raw);
    bool mq = c.m1 == -0.75 && c.m2 == -0.75;
    ok = ok && mq;
    if (!mq) note += fmt(" m1 = %g, m2 = %g", c.m1, c.m2);
  }
  verdict(4, ok, "cartesian reductions are exact", note);
}

void criterion_5(const std::vector<Sample>& samples) {
  const real h = 1e-6;
  real worst = 0;
  int used = 0;
  for (const auto& s : samples) {
    if (used >= 100) break;
    ++used;
    for (int n = 1; n <= 5; ++n) {
      TaylorVLeft t = taylor_v_left(n, s.m, s.f);
      for (int dir = 0; dir < 2; ++dir) {
        LambdaPair lp_p{dir == 0 ? h : 0.0, dir == 1 ? h : 0.0};
        LambdaPair lp_m{dir == 0 ? -h : 0.0, dir == 1 ? -h : 0.0};
        CVec5 vp = v_left(n, s.m, s.f, lp_p), vm = v_left(n, s.m, s.f, lp_m);
        const Vec5& an = dir == 0 ? t.d_lambda1 : t.d_lambda2;
        for (int c = 0; c < 5; ++c)
          worst = std::max(worst, std::abs((vp(c, 0) - vm(c, 0)) / (2 * h) -
                                           cplx(an(c, 0))));
      }
    }
  }
  verdict(5, worst <= 1e-6, "analytic Taylor rows match central finite differences",
          fmt("max abs dev %.2e over %d samples (tol 1e-6)", worst, used));
}

void criterion_6() {
  Rng rng(2026);
  int bad_rank = 0;
  real worst_k = 0, worst_outflow = 1e30;
  int n_samples = 20;
  for (int s = 0; s < n_samples; ++s) {
    Metric m = random_orthogonal_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    real l = rng.uniform(0.2, 2.0), m_wn = rng.uniform(-2.0, 2.0);
    InflowFinding fd = detect_illposed_inflow(m, f, l, m_wn);
    if (fd.rank != 2) ++bad_rank;
    ContravariantFlow cv = contravariant(m, nondimensionalize(moving_frame(m, f)));
    worst_k = std::max(worst_k, std::abs(fd.k4_star - fd.k3_star) * cv.U);
    OutflowVerdict v = outflow_wellposed_check(m, f, 2.0, 50);
    worst_outflow = std::min(worst_outflow, v.min_abs_scalar / v.scale);
  }
  bool pass = bad_rank == 0 && worst_k <= 1e-10 && worst_outflow > 0.01;
  verdict(6, pass, "orthogonal-grid well-posedness conclusions reproduced",
          fmt("rank-2 failures %d/%d, |k4*-k3*| U max %.2e (tol 1e-10), "
              "outflow min |scalar| %.3f (floor 0.01)",
              bad_rank, n_samples, worst_k, worst_outflow));
}

void criterion_7() {
  Rng rng(31337);
  real worst_a = 0;
  int checked = 0;
  while (checked < 200) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    ModCoefficients c;
    try {
      c = compute_m(m, f, MPath::raw);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    real scale = std::max({std::abs(c.m1), std::abs(c.m2), real(1)});
    worst_a = std::max({worst_a, std::abs(c.A1) / scale, std::abs(c.A3) / scale});
  }
  ModCoefficients cart =
      compute_m(Metric::cartesian(), MeanFlow::nondimensional(0.5), MPath::raw);

  int min_rank = 4, max_rank = 0;
  int n_samples = 20;
  for (int s = 0; s < n_samples; ++s) {
    Metric m = random_orthogonal_metric(rng);
    MeanFlow f = moving_frame(m, random_subsonic_flow(rng, m));
    real l = rng.uniform(0.2, 2.0), m_wn = rng.uniform(-2.0, 2.0);
    cplx omega = illposed_frequency(m, f, l, m_wn);
    LambdaPair lp{l / omega, m_wn / omega};
    CriticalMatrix cm = critical_matrix_inflow_modified(m, f, lp);
    int r = numeric_rank(cm.C);
    min_rank = std::min(min_rank, r);
    max_rank = std::max(max_rank, r);
  }
  bool algebra_ok = worst_a <= 1e-14 && cart.A2 == 0.0;
  bool rank_ok = min_rank == 4 && max_rank == 4;
  verdict(7, algebra_ok && rank_ok, "modified-BC algebra and rank at the old locus",
          fmt("A1/A3 max %.2e (tol 1e-14), cartesian A2 %g, modified rank %d..%d "
              "(target pins 4; the correction removes the acoustic null but rows "
              "2-3 keep the vorticity-pair degeneracy, so rank 3 is forced -- see "
              "the surrounding analysis tests)",
              worst_a, cart.A2, min_rank, max_rank));
}

void criterion_8() {
  Rng rng(5150);
  real worst_slope_dev = 0;
  for (int s = 0; s < 20; ++s) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    BCOperator op = build_quasi3d(m, f, Side::outflow);
    real d1 = rng.uniform(0.3, 1.0), d2 = rng.uniform(-1.0, 1.0);
    std::vector<real> lr;
    for (real e : {1e-1, 1e-2, 1e-3}) {
      LambdaPair lp{e * d1, e * d2};
      cplx omega(1.0, 0.0);
      CVec5 u4 = right_eigenvector(4, m, f, lp);
      CVec5 qt, qe, qz;
      for (int c = 0; c < 5; ++c) {
        qt(c, 0) = -cplx(0, 1) * omega * u4(c, 0);
        qe(c, 0) = cplx(0, 1) * lp.lambda1 * omega * u4(c, 0);
        qz(c, 0) = cplx(0, 1) * lp.lambda2 * omega * u4(c, 0);
      }
      auto res = bc_residual(op, qt, qe, qz);
      lr.push_back(std::log10(std::abs(res[0]) / max_abs(u4)));
    }
    worst_slope_dev = std::max(worst_slope_dev, std::abs((lr[0] - lr[2]) / 2.0 - 2.0));
  }
  verdict(8, worst_slope_dev <= 0.1, "quasi-3D outflow absorption is second order",
          fmt("max |slope - 2| = %.3f (tol 0.1)", worst_slope_dev));
}

void criterion_9() {
  auto t0 = std::chrono::steady_clock::now();
  auto run_case = [&](const std::string& mapping, real shear, BCKind right,
                      real angle) {
    SimConfig c;
    c.dims = {64, 32, 32};
    c.flow = MeanFlow::nondimensional(0.5);
    c.mapping = mapping;
    c.mapping_params = {{"lx", 2.0}};
    if (shear != 0) c.mapping_params["xi_y"] = shear;
    c.bc_left = BCKind::first_order;
    c.bc_right = right;
    c.pulse.angle_deg = angle;
    c.pulse.tangential_mode = 2;
    return run_simulation(c).reflection[0].ratio;
  };

  bool pass = true;
  std::string detail;
  for (int g = 0; g < 2; ++g) {
    std::string mapping = g == 0 ? "identity" : "sheared";
    real shear = g == 0 ? 0.0 : 0.2;
    real fo = run_case(mapping, shear, BCKind::first_order, 30.0);
    real q3 = run_case(mapping, shear, BCKind::quasi3d, 30.0);
    real mod = run_case(mapping, shear, BCKind::modified, 30.0);
    bool ordered = mod <= q3 * (1 + 1e-12) && q3 <= fo * (1 + 1e-12);
    pass = pass && ordered;
    detail += fmt("%s: modified %.2e <= quasi3d %.2e <= first_order %.2e%s; ",
                  mapping.c_str(), mod, q3, fo, ordered ? "" : " VIOLATED");
  }
  real normal = run_case("identity", 0.0, BCKind::first_order, 0.0);
  pass = pass && normal < 1e-3;
  detail += fmt("normal-incidence first_order %.2e (tol 1e-3); ", normal);

  {
    SimConfig c;
    c.dims = {64, 32, 32};
    c.flow = MeanFlow::nondimensional(0.5);
    c.mapping_params = {{"lx", 2.0}};
    c.bc_left = BCKind::first_order;
    c.bc_right = BCKind::hard_wall;
    real wall = run_simulation(c).reflection[0].ratio;
    pass = pass && wall >= 0.9 && wall <= 1.1;
    detail += fmt("hard-wall control %.2f (window 0.9..1.1); ", wall);
  }
  double dt = seconds_since(t0);
  pass = pass && dt < 600.0;
  detail += fmt("runtime %.0f s (budget 600)", dt);
  verdict(9, pass, "reflection experiment: 64x32x32, 30-degree incidence", detail);
}

void criterion_10() {
  // grid-refinement slope on exact acoustic advection
  std::vector<real> hs, errs;
  const real amp = 1e-4, T = 0.3;
  for (int N : {16, 24, 32, 48}) {
    SimConfig c;
    c.dims = {N, 8, 8};
    c.flow = MeanFlow::nondimensional(0.5);
    c.bc_left = c.bc_right = BCKind::periodic;
    c.pulse.amplitude = 0.0;
    c.pulse.width = 0.1;
    c.dt = 0.4 / (1.5 * (N - 1));
    LeeSimulator sim(c);
    auto& st = sim.state();
    const auto& d = st.dims;
    const real pi2 = 2 * std::numbers::pi_v<real>;
    // the periodic lattice spans N h with both endpoints stored, so the
    // wave must carry the lattice period, not the unit interval
    const real ksin = pi2 * (N - 1) / real(N);
    for (int i = 0; i < d.ni; ++i)
      for (int j = 0; j < d.nj; ++j)
        for (int k = 0; k < d.nk; ++k) {
          long long idx = node_index(d, i, j, k);
          real v = amp * std::sin(ksin * real(i) / (d.ni - 1));
          st.at(0, idx) = v;
          st.at(1, idx) = v;
          st.at(4, idx) = v;
        }
    int steps = (int)std::round(T / sim.dt());
    for (int s = 0; s < steps; ++s) sim.step();
    real err = 0;
    for (int i = 0; i < d.ni; ++i) {
      real x = real(i) / (d.ni - 1);
      real exact = amp * std::sin(ksin * (x - 1.5 * sim.state().time));
      err = std::max(err, std::abs(st.at(4, node_index(d, i, 3, 3)) - exact));
    }
    hs.push_back(1.0 / (N - 1));
    errs.push_back(err);
  }
  real sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = (int)hs.size();
  for (int i = 0; i < n; ++i) {
    real lx = std::log(hs[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  real slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  // determinism across repeated runs and worker counts
  auto run_state = [&](int threads) {
    SimConfig c;
    c.dims = {24, 10, 10};
    c.flow = MeanFlow::nondimensional(0.5);
    c.bc_left = BCKind::first_order;
    c.bc_right = BCKind::quasi3d;
    c.pulse.angle_deg = 15.0;
    c.pulse.tangential_mode = 1;
    c.threads = threads;
    LeeSimulator sim(c);
    for (int s = 0; s < 25; ++s) sim.step();
    return sim.state().q;
  };
  auto a = run_state(1), b = run_state(1), c2 = run_state(2), c4 = run_state(4);
  bool bitwise = a == b && a == c2 && a == c4;

  bool pass = std::abs(slope - 4.0) <= 0.3 && bitwise;
  verdict(10, pass, "interior scheme order and bit-for-bit determinism",
          fmt("refinement slope %.2f (target 4 +- 0.3), bit-identical %s", slope,
              bitwise ? "yes" : "NO"));
}

}  // namespace

int main() {
  std::printf("acceptance suite: seeded, tolerances pinned in code\n");
  auto samples = draw_samples(20260808ULL, 1000);
  criterion_1_2(samples);
  criterion_3(samples);
  criterion_4();
  criterion_5(samples);
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
