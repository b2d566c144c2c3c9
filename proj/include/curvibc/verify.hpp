#pragma once

// Seeded verification suites behind the `verify` CLI subcommand. Each
// suite sweeps the module invariants over random samples and reports the
// worst measured deviation against its tolerance.

#include <string>
#include <vector>

#include "curvibc/bc_modified.hpp"
#include "curvibc/bc_quasi3d.hpp"
#include "curvibc/characteristics.hpp"
#include "curvibc/core.hpp"
#include "curvibc/dispersion.hpp"
#include "curvibc/eigenvectors.hpp"
#include "curvibc/sampling.hpp"
#include "curvibc/wellposedness.hpp"

namespace curvibc {

struct CheckResult {
  std::string name;
  int samples = 0;
  real measured = 0;  // worst deviation, or the reported quantity
  real tolerance = 0;
  bool pass = true;
  std::string note;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail_verify {

class Check {
 public:
  Check(std::string name, real tol) : r_{std::move(name), 0, 0, tol, true, ""} {}
  void update(real err) {
    r_.measured = std::max(r_.measured, err);
    ++r_.samples;
  }
  void note(std::string n) { r_.note = std::move(n); }
  CheckResult finish(bool informational = false) {
    if (!informational) r_.pass = r_.measured <= r_.tolerance;
    return r_;
  }

 private:
  CheckResult r_;
};

inline real vec_norm_inf(const CVec5& v) { return max_abs(v); }

// residual of a right vector against the dispersion matrix at mode n
inline real kernel_residuals(int n, const Metric& m, const MeanFlow& flow,
                             const LambdaPair& lp, real* left_out) {
  cplx omega(1.0, 0.0);
  cplx k = (n <= 3) ? k_star_convected(m, flow, lp) : k_star(n, m, flow, lp);
  WaveVector w{k * omega, lp.lambda1 * omega, lp.lambda2 * omega, omega};
  DispersionMatrix d = dispersion_matrix(m, flow, w);
  CVec5 r = right_eigenvector(n, m, flow, lp);
  CVec5 l = left_eigenvector(n, m, flow, lp);
  real mn = max_abs(d.M);
  CVec5 mr = matmul(d.M, r);
  CVec5 lm = row_times(l, d.M);
  *left_out = vec_norm_inf(lm) / (mn * vec_norm_inf(l));
  return vec_norm_inf(mr) / (mn * vec_norm_inf(r));
}

}  // namespace detail_verify

// --------------------------------------------------------------------------
// eigen: kernel residuals and biorthonormality of the limit vectors
// --------------------------------------------------------------------------
inline SuiteReport verify_eigen(std::uint64_t seed, int samples, real tol_scale = 1.0) {
  using detail_verify::Check;
  Rng rng(seed);
  SuiteReport rep{"eigen", seed, {}};
  Check right("right_kernel_residual", 1e-10 * tol_scale);
  Check left("left_kernel_residual", 1e-10 * tol_scale);
  Check diag("limit_biorthonormal_diagonal", 1e-12 * tol_scale);
  Check off("limit_offdiagonal_modes_1_4_5", 1e-12 * tol_scale);
  Check w23("limit_w2l_w3r_closed_form", 1e-12 * tol_scale);
  Check vdual("v_left_dual_construction", 1e-13 * tol_scale);

  for (int s = 0; s < samples; ++s) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    LambdaPair lp = random_lambda(rng);
    for (int n = 1; n <= 5; ++n) {
      real lres = 0;
      real rres = detail_verify::kernel_residuals(n, m, f, lp, &lres);
      right.update(rres);
      left.update(lres);
      v_left(n, m, f, lp);  // internal 1e-13 cross-check throws on mismatch
      vdual.update(0.0);
    }
    LimitVectors w = limit_vectors(m, f);
    MetricNorms nm = compute_norms(m);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        real prod = dot(w.left[a], w.right[b]);
        if (a == b) {
          diag.update(std::abs(prod - 1.0));
        } else if (a == 1 && b == 2) {
          w23.update(std::abs(prod - m.xi_y * m.xi_z / sq(nm.psi3)));
        } else if (a == 2 && b == 1) {
          w23.update(std::abs(prod - m.xi_y * m.xi_z / sq(nm.psi2)));
        } else {
          off.update(std::abs(prod));
        }
      }
  }
  w23.note("documented deviation: the vorticity pair is not biorthogonal off axis-aligned metrics");
  rep.checks = {right.finish(), left.finish(), diag.finish(), off.finish(),
                w23.finish(), vdual.finish()};
  return rep;
}

// --------------------------------------------------------------------------
// dispersion: root substitution, branch rules, scale invariance, k*
// consistency, group velocities
// --------------------------------------------------------------------------
inline SuiteReport verify_dispersion(std::uint64_t seed, int samples,
                                     real tol_scale = 1.0) {
  using detail_verify::Check;
  Rng rng(seed);
  SuiteReport rep{"dispersion", seed, {}};
  Check subs("root_substitution", 1e-9 * tol_scale);
  Check osubs("omega_root_substitution", 1e-10 * tol_scale);
  Check branch("complex_branch_rule", 0.0);
  Check scale("scale_invariance", 1e-12 * tol_scale);
  Check kstar("k_star_consistency", 1e-12 * tol_scale);
  Check gv("group_velocity_vs_fd", 1e-5 * tol_scale);
  Check det_id("determinant_factored_vs_lu", 1e-10 * tol_scale);
  Check sstar("s_star_lambda0_limit", 1e-13 * tol_scale);

  for (int s = 0; s < samples; ++s) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    real l = rng.uniform(-0.3, 0.3), m_wn = rng.uniform(-0.3, 0.3);
    real omega = rng.uniform(0.5, 2.0);

    RootSet rs = roots_k(m, f, l, m_wn, omega);
    for (int n = 0; n < 5; ++n) {
      WaveVector w{rs.k[n], l, m_wn, omega};
      DispersionMatrix d = dispersion_matrix(m, f, w);
      real sc = std::pow(std::abs(d.beta) + std::abs(d.alpha1) + std::abs(d.alpha2) +
                             std::abs(d.alpha3) + std::abs(cplx(omega)),
                         5);
      subs.update(std::abs(dispersion_determinant(d)) / sc);
    }
    // determinant identity against the library LU path
    {
      WaveVector w{cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)), l, m_wn, omega};
      DispersionMatrix d = dispersion_matrix(m, f, w);
      cplx lu = lu_det(d.M);
      det_id.update(std::abs(dispersion_determinant(d) - lu) /
                    std::max({std::abs(lu), real(1)}));
    }
    // omega roots annihilate the determinant
    real kq = rng.uniform(-1.0, 1.0);
    auto omegas = roots_omega(m, f, kq, l, m_wn);
    for (const cplx& om : omegas) {
      DispersionMatrix d = dispersion_matrix(m, f, {kq, l, m_wn, om});
      real sc = std::pow(std::abs(d.beta) + std::abs(d.alpha1) + std::abs(d.alpha2) +
                             std::abs(d.alpha3) + std::abs(om) + 1.0,
                         5);
      osubs.update(std::abs(dispersion_determinant(d)) / sc);
    }
    // Im(omega) > 0 forces Im(k4) > 0 > Im(k5)
    {
      cplx omc(omega, rng.uniform(0.05, 0.5));
      RootSet rc = roots_k(m, f, l, m_wn, omc);
      branch.update((rc.k[3].imag() > 0 && rc.k[4].imag() < 0) ? 0.0 : 1.0);
    }
    // homogeneity of the dispersion polynomial
    {
      real fac = rng.uniform(0.3, 3.0);
      RootSet r2 = roots_k(m, f, fac * l, fac * m_wn, fac * omega);
      for (int n = 0; n < 5; ++n)
        scale.update(std::abs(r2.k[n] - fac * rs.k[n]) /
                     std::max(std::abs(fac * rs.k[n]), real(1)));
    }
    // k*(lambda) times omega reproduces the acoustic roots
    {
      LambdaPair lp{l / omega, m_wn / omega};
      kstar.update(std::abs(k_star(4, m, f, lp) * omega - rs.k[3]) /
                   std::max(std::abs(rs.k[3]), real(1)));
      kstar.update(std::abs(k_star(5, m, f, lp) * omega - rs.k[4]) /
                   std::max(std::abs(rs.k[4]), real(1)));
    }
    // group velocity against finite differences of the omega roots
    if (std::abs(kq) + std::abs(l) + std::abs(m_wn) > 1e-3) {
      auto [cg4, cg5] = group_velocity_acoustic(m, f, kq, l, m_wn);
      real h = 1e-6;
      auto op = roots_omega(m, f, kq + h, l, m_wn);
      auto om2 = roots_omega(m, f, kq - h, l, m_wn);
      gv.update(std::abs(cg4 - (op[3] - om2[3]).real() / (2 * h)));
      gv.update(std::abs(cg5 - (op[4] - om2[4]).real() / (2 * h)));
    }
    // S* at lambda = 0
    {
      MetricNorms nm = compute_norms(m);
      ContravariantFlow cv = contravariant(m, f);
      sstar.update(std::abs(s_star(m, f, LambdaPair{}) - nm.norm_xi / cv.U));
    }
  }
  rep.checks = {subs.finish(),  osubs.finish(), branch.finish(), scale.finish(),
                kstar.finish(), gv.finish(),    det_id.finish(), sstar.finish()};
  return rep;
}

// --------------------------------------------------------------------------
// transform: Cartesian exactness, round trips, projection idempotence,
// unit-mode consistency, and the documented reconstruction deviation
// --------------------------------------------------------------------------
inline SuiteReport verify_transform(std::uint64_t seed, int samples,
                                    real tol_scale = 1.0) {
  using detail_verify::Check;
  Rng rng(seed);
  SuiteReport rep{"transform", seed, {}};
  Check cart("cartesian_tables_exact", 0.0);
  Check prod("cartesian_product_identity", 0.0);
  Check rt("cartesian_round_trip", 1e-14 * tol_scale);
  Check idem("projection_idempotence", 1e-13 * tol_scale);
  Check dimc("dimensional_consistency", 0.0);
  Check inv0("modal_reconstruction_inverse_xiy_xiz_zero", 1e-12 * tol_scale);
  Check invg("modal_reconstruction_deviation_general", 0.0);

  // Cartesian: the published integer matrices, exactly
  {
    Metric m = Metric::cartesian();
    MeanFlow f = MeanFlow::nondimensional(0.5, 0.1, 0.2);
    CharTransform t = build_transform(m, f);
    Mat5 to_ref{}, from_ref{};
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
        to_ref(r, c) = T[r][c];
        from_ref(r, c) = F[r][c];
      }
    cart.update(t.to_char == to_ref && t.from_char == from_ref ? 0.0 : 1.0);
    prod.update(matmul(t.from_char, t.to_char) == Mat5::identity() ? 0.0 : 1.0);
    // dimensional mode with unit scales must be bit-identical
    CharTransform td = build_transform(m, f, UnitMode::dimensional);
    dimc.update(td.to_char == t.to_char && td.from_char == t.from_char ? 0.0 : 1.0);
    for (int s = 0; s < 32; ++s) {
      Perturbation q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(-1, 1), rng.uniform(-1, 1)};
      Perturbation back = from_characteristics(t, to_characteristics(t, q));
      rt.update(max_abs(back.as_vec() - q.as_vec()));
    }
  }

  real worst_general_dev = 0;
  std::vector<CheckResult> per_metric;
  for (int s = 0; s < samples; ++s) {
    Metric m = random_metric(rng);
    if (s % 2 == 0) m.xi_z = 0;  // half the draws satisfy xi_y*xi_z = 0
    if (!m.is_valid()) continue;
    MeanFlow f = random_subsonic_flow(rng, m);
    CharTransform t = build_transform(m, f);
    Mat5 inv = lu_inverse(t.to_char, "to_char");
    real dev = max_abs(t.from_char - inv);
    if (std::abs(m.xi_y * m.xi_z) <= 1e-13)
      inv0.update(dev);
    else
      worst_general_dev = std::max(worst_general_dev, dev);
    if (s < 12) {
      // per-metric deviation rows for the emitted table
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "xi=(%.3f,%.3f,%.3f) xi_y*xi_z=%.3e", m.xi_x, m.xi_y, m.xi_z,
                    m.xi_y * m.xi_z);
      per_metric.push_back({"reconstruction_deviation_metric_" + std::to_string(s),
                            1, dev, 0.0, true, buf});
    }

    // projection idempotence: exact-inverse mode on any metric; the
    // modal-mode outflow projection is only idempotent when the modal
    // reconstruction is the true inverse (xi_y * xi_z = 0), so that mode
    // is checked on its valid cases plus the inflow side generally
    for (auto recmode : {Reconstruction::modal, Reconstruction::exact_inverse}) {
      CharTransform tr = build_transform(m, f, UnitMode::nondimensional, recmode);
      Perturbation q{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(-1, 1), rng.uniform(-1, 1)};
      Perturbation once = apply_inflow_1d(tr, q);
      Perturbation twice = apply_inflow_1d(tr, once);
      idem.update(max_abs(twice.as_vec() - once.as_vec()));
      if (recmode == Reconstruction::exact_inverse ||
          std::abs(m.xi_y * m.xi_z) <= 1e-13) {
        once = apply_outflow_1d(tr, q);
        twice = apply_outflow_1d(tr, once);
        idem.update(max_abs(twice.as_vec() - once.as_vec()));
      }
    }
  }
  invg.update(worst_general_dev);
  invg.note("modal reconstruction is not the exact inverse when xi_y*xi_z != 0; deviation reported");
  rep.checks = {cart.finish(), prod.finish(), rt.finish(),  idem.finish(),
                dimc.finish(), inv0.finish(), invg.finish(true)};
  rep.checks.insert(rep.checks.end(), per_metric.begin(), per_metric.end());
  return rep;
}

// --------------------------------------------------------------------------
// quasi3d: Taylor rows against finite differences, Cartesian reduction,
// characteristic-table symmetries, and the modal absorption order
// --------------------------------------------------------------------------
inline SuiteReport verify_quasi3d(std::uint64_t seed, int samples,
                                  real tol_scale = 1.0) {
  using detail_verify::Check;
  Rng rng(seed);
  SuiteReport rep{"quasi3d", seed, {}};
  Check fd("taylor_vs_finite_difference", 1e-6 * tol_scale);
  Check cart("cartesian_reduction_exact", 0.0);
  Check sym("characteristic_row_symmetries", 1e-14 * tol_scale);
  Check orth("orthogonal_g45_h45_zero", 1e-13 * tol_scale);
  Check slope("outflow_absorption_order", 0.1 * tol_scale);
  Check first("first_order_reduction", 0.0);

  const real h = 1e-6;
  for (int s = 0; s < samples; ++s) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    for (int n = 1; n <= 5; ++n) {
      TaylorVLeft t = taylor_v_left(n, m, f);
      for (int dir = 0; dir < 2; ++dir) {
        LambdaPair lp_p{dir == 0 ? h : 0.0, dir == 1 ? h : 0.0};
        LambdaPair lp_m{dir == 0 ? -h : 0.0, dir == 1 ? -h : 0.0};
        CVec5 vp = v_left(n, m, f, lp_p);
        CVec5 vm = v_left(n, m, f, lp_m);
        const Vec5& an = dir == 0 ? t.d_lambda1 : t.d_lambda2;
        for (int c = 0; c < 5; ++c)
          fd.update(std::abs((vp(c, 0) - vm(c, 0)) / (2 * h) - cplx(an(c, 0))));
      }
    }
  }

  // Cartesian reduction: integer tables, exact comparison
  {
    Metric m = Metric::cartesian();
    real ub = 0.5, vb = 0.125, wb = 0.25;  // dyadic so products are exact
    MeanFlow f = MeanFlow::nondimensional(ub, vb, wb);
    BCOperator in = build_quasi3d(m, f, Side::inflow);
    BCOperator out = build_quasi3d(m, f, Side::outflow);
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
    bool ok = true;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 5; ++c)
        ok = ok && in.G[r](c, 0) == Gy[r][c] && in.H[r](c, 0) == Hz[r][c];
    for (int c = 0; c < 5; ++c)
      ok = ok && out.G[0](c, 0) == G5[c] && out.H[0](c, 0) == H5[c];
    cart.update(ok ? 0.0 : 1.0);
    cart.note("published Cartesian reduction has one dropped entry: row 2 of the eta table couples the pressure gradient");
  }

  // characteristic-form row symmetries and the orthogonal-grid zeros
  for (int s = 0; s < 24; ++s) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    BCOperator in = build_quasi3d(m, f, Side::inflow, Basis::characteristic);
    BCOperator out = build_quasi3d(m, f, Side::outflow, Basis::characteristic);
    for (int c : {1, 2}) {
      sym.update(std::abs(out.G[0](c, 0) + in.G[3](c, 0)));
      sym.update(std::abs(out.H[0](c, 0) + in.H[3](c, 0)));
    }
    sym.update(std::abs(out.G[0](4, 0) - in.G[3](3, 0)));

    Metric mo = random_orthogonal_metric(rng);
    MeanFlow fo = random_subsonic_flow(rng, mo);
    BCOperator ino = build_quasi3d(mo, fo, Side::inflow, Basis::characteristic);
    orth.update(std::abs(ino.G[3](4, 0)));
    orth.update(std::abs(ino.H[3](4, 0)));

    BCOperator fo1 = build_first_order(m, f, Side::inflow);
    bool zero = true;
    for (int r = 0; r < 4; ++r) zero = zero && max_abs(fo1.G[r]) == 0 && max_abs(fo1.H[r]) == 0;
    BCOperator q3 = build_quasi3d(m, f, Side::inflow);
    bool tmatch = true;
    for (int r = 0; r < 4; ++r) tmatch = tmatch && fo1.time_rows[r] == q3.time_rows[r];
    first.update(zero && tmatch ? 0.0 : 1.0);
  }

  // absorption order: outflow residual on exact outgoing modes is O(eps^2)
  {
    for (int s = 0; s < 12; ++s) {
      Metric m = random_metric(rng);
      MeanFlow f = random_subsonic_flow(rng, m);
      BCOperator op = build_quasi3d(m, f, Side::outflow);
      real dir1 = rng.uniform(0.3, 1.0), dir2 = rng.uniform(-1.0, 1.0);
      std::vector<real> eps = {1e-1, 1e-2, 1e-3}, lr;
      for (real e : eps) {
        LambdaPair lp{e * dir1, e * dir2};
        cplx omega(1.0, 0.0);
        CVec5 u4 = right_eigenvector(4, m, f, lp);
        CVec5 qt, qeta, qzeta;
        for (int c = 0; c < 5; ++c) {
          qt(c, 0) = -cplx(0, 1) * omega * u4(c, 0);
          qeta(c, 0) = cplx(0, 1) * lp.lambda1 * omega * u4(c, 0);
          qzeta(c, 0) = cplx(0, 1) * lp.lambda2 * omega * u4(c, 0);
        }
        auto res = bc_residual(op, qt, qeta, qzeta);
        lr.push_back(std::log10(std::abs(res[0]) / max_abs(u4)));
      }
      // slope over the three decades
      real fitted = (lr[0] - lr[2]) / 2.0;
      slope.update(std::abs(fitted - 2.0));
    }
    slope.note("log-log slope of the residual on exact outgoing modes, target 2");
  }

  rep.checks = {fd.finish(),   cart.finish(),  sym.finish(),
                orth.finish(), slope.finish(), first.finish()};
  return rep;
}

// --------------------------------------------------------------------------
// wellposed: the orthogonal-grid conclusions and their numeric guards
// --------------------------------------------------------------------------
inline SuiteReport verify_wellposed(std::uint64_t seed, int samples,
                                    real tol_scale = 1.0) {
  using detail_verify::Check;
  Rng rng(seed);
  SuiteReport rep{"wellposed", seed, {}};
  Check gam("gamma_cancellation_on_locus", 1e-12 * tol_scale);
  Check rank2("inflow_rank_2_on_locus", 0.0);
  Check k34("k3_equals_k4_on_locus", 1e-10 * tol_scale);
  Check structure("critical_matrix_structure", 1e-12 * tol_scale);
  Check outflow("outflow_scalar_bounded", 0.0);
  Check frames("cartesian_dual_frame_locus", 1e-10 * tol_scale);

  int n = std::max(4, samples);
  for (int s = 0; s < n; ++s) {
    Metric m = random_orthogonal_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    MeanFlow frame = moving_frame(m, f);
    real l = rng.uniform(0.2, 2.0), m_wn = rng.uniform(-2.0, 2.0);

    InflowFinding fd = detect_illposed_inflow(m, f, l, m_wn);
    ContravariantFlow cv = contravariant(m, frame);
    gam.update(fd.gamma_cancellation / sq(compute_norms(m).norm_xi));
    rank2.update(fd.rank == 2 ? 0.0 : 1.0);
    k34.update(std::abs(fd.k4_star - fd.k3_star) * cv.U);

    // structural zeros at generic real lambda
    LambdaPair lp = random_lambda(rng, 0.4);
    CriticalMatrix cm = critical_matrix_inflow(m, frame, lp);
    structure.update(std::abs(cm.C(0, 0) - cplx(1)));
    for (int j = 1; j < 4; ++j) {
      structure.update(std::abs(cm.C(0, j)));
      structure.update(std::abs(cm.C(j, 0)));
    }
    structure.update(std::abs(cm.C(1, 3)));
    structure.update(std::abs(cm.C(2, 3)));
    structure.update(std::abs(cm.C(3, 1)));
    structure.update(std::abs(cm.C(3, 2)));
  }

  // outflow sweep on a few orthogonal metrics
  real sweep_min = std::numeric_limits<real>::infinity();
  for (int s = 0; s < std::min(6, n); ++s) {
    Metric m = random_orthogonal_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    OutflowVerdict v = outflow_wellposed_check(m, f, 2.0, 50);
    outflow.update(v.well_posed ? 0.0 : 1.0);
    sweep_min = std::min(sweep_min, v.min_abs_scalar);
  }
  outflow.note("minimum |scalar| over the candidate locus sweeps = " +
               std::to_string(sweep_min) + ", floor 0.01");

  // Cartesian dual-frame check: the det minimum sits at the same physical
  // locus after the Doppler shift between frames
  {
    Metric m = Metric::cartesian();
    MeanFlow f = MeanFlow::nondimensional(0.5, 0.15, -0.1);
    MeanFlow frame = moving_frame(m, f);
    real l = 1.0, m_wn = 0.5;
    cplx w_frame = illposed_frequency(m, frame, l, m_wn);
    DetScan sc = det_scan_inflow(m, frame, l, m_wn, w_frame, 0.3, 21);
    frames.update(std::abs(sc.argmin - w_frame) / std::abs(w_frame));
    // the original-frame frequency is Doppler shifted; the critical matrix
    // itself is frame-identical for Cartesian metrics, checked directly
    LambdaPair lp{l / w_frame, m_wn / w_frame};
    CriticalMatrix a = critical_matrix_inflow(m, frame, lp);
    frames.update(numeric_rank(a.C) == 2 ? 0.0 : 1.0);
  }

  rep.checks = {gam.finish(),       rank2.finish(),   k34.finish(),
                structure.finish(), outflow.finish(), frames.finish()};
  return rep;
}

// --------------------------------------------------------------------------
// modified: coefficient algebra, the reflection-product fit, the binomial
// expansion of S*, and the rank change at the old locus
// --------------------------------------------------------------------------
inline SuiteReport verify_modified(std::uint64_t seed, int samples,
                                   real tol_scale = 1.0) {
  using detail_verify::Check;
  Rng rng(seed);
  SuiteReport rep{"modified", seed, {}};
  Check a13("a1_a3_vanish", 1e-14 * tol_scale);
  Check cartm("cartesian_m_values", 1e-14 * tol_scale);
  Check fit11("product_fit_lambda1_sq", 1e-10 * tol_scale);
  Check fit22("product_fit_lambda2_sq", 1e-10 * tol_scale);
  Check fit12("product_fit_cross_vs_A2", 1e-8 * tol_scale);
  Check binom("s_star_binomial_expansion", 1.5);
  Check rank_mod("modified_rank_at_old_locus", 0.0);
  Check l0("modified_v4_lambda0_limit", 1e-14 * tol_scale);

  for (int s = 0; s < samples; ++s) {
    Metric m = random_metric(rng);
    MeanFlow f = random_subsonic_flow(rng, m);
    ModCoefficients c;
    try {
      c = compute_m(m, f, MPath::raw);
    } catch (const Error&) {
      continue;  // degenerate denominator draw
    }
    real scale = std::max({std::abs(c.m1), std::abs(c.m2), real(1)});
    a13.update(std::abs(c.A1) / scale);
    a13.update(std::abs(c.A3) / scale);
    CVec5 v0 = modified_v4(m, f, LambdaPair{});
    LimitVectors w = limit_vectors(m, f);
    for (int j = 0; j < 5; ++j) l0.update(std::abs(v0(j, 0) - cplx(w.left[3](j, 0))));
  }

  {
    MeanFlow f = MeanFlow::nondimensional(0.5);
    ModCoefficients c = compute_m(Metric::cartesian(), f, MPath::limit_form);
    cartm.update(std::abs(c.m1 + 0.75));
    cartm.update(std::abs(c.m2 + 0.75));
    cartm.update(std::abs(c.A2));
  }

  // quadratic coefficients of the reflection product, fitted on orthogonal
  // metrics in the advected frame (the regime the construction targets)
  int nfit = std::max(4, samples / 8);
  for (int s = 0; s < nfit; ++s) {
    Metric m = random_orthogonal_metric(rng);
    MeanFlow f0 = random_subsonic_flow(rng, m);
    MeanFlow f = moving_frame(m, f0);
    ModCoefficients c;
    try {
      c = compute_m(m, f, MPath::raw);
    } catch (const Error&) {
      continue;
    }
    auto product = [&](real l1, real l2) -> real {
      LambdaPair lp{l1, l2};
      CVec5 v4 = modified_v4(m, f, lp);
      CVec5 u5 = right_eigenvector(5, m, f, lp);
      return dot(v4, u5).real();
    };
    auto second = [&](auto&& P, real h) {
      auto Q = [&](real hh) { return (P(hh) + P(-hh) - 2 * P(0.0)) / (2 * hh * hh); };
      real q1 = Q(h), q2 = Q(h / 2), q3 = Q(h / 4);
      real a = (4 * q2 - q1) / 3, b = (4 * q3 - q2) / 3;
      return (16 * b - a) / 15;
    };
    const real h = 0.02;
    real c11 = second([&](real t) { return product(t, 0.0); }, h);
    real c22 = second([&](real t) { return product(0.0, t); }, h);
    auto Qm = [&](real hh) {
      return (product(hh, hh) + product(-hh, -hh) - product(hh, -hh) -
              product(-hh, hh)) /
             (4 * hh * hh);
    };
    real m1 = Qm(h), m2 = Qm(h / 2), m3 = Qm(h / 4);
    real ma = (4 * m2 - m1) / 3, mb = (4 * m3 - m2) / 3;
    real c12 = (16 * mb - ma) / 15;
    MetricNorms nm = compute_norms(m);
    ContravariantFlow cv = contravariant(m, f);
    real pre = (cv.U - nm.norm_xi) / (2 * sq(nm.norm_xi));
    fit11.update(std::abs(c11));
    fit22.update(std::abs(c22));
    fit12.update(std::abs(c12 - pre * c.A2) / std::max(std::abs(pre * c.A2), real(1)));
  }
  fit12.note("fitted cross coefficient matches the closed-form A2; its size is reported, never assumed small");

  // binomial expansion of S* on orthogonal grids: relative error <= 1.5 Gamma^2
  for (int s = 0; s < 8; ++s) {
    Metric m = random_orthogonal_metric(rng);
    MeanFlow f = moving_frame(m, random_subsonic_flow(rng, m));
    MetricNorms nm = compute_norms(m);
    ContravariantFlow cv = contravariant(m, f);
    for (real gamma : {1e-4, 1e-3, 1e-2}) {
      real l1 = std::sqrt(gamma) / nm.norm_eta;
      cplx exact = s_star(m, f, LambdaPair{l1, 0.0});
      real series = nm.norm_xi / cv.U *
                    (1 + 0.5 * (sq(cv.U) - sq(nm.norm_xi)) / sq(nm.norm_xi) * gamma);
      binom.update(std::abs(exact - series) / std::abs(series) / (gamma * gamma));
    }
  }
  binom.note("relative truncation error divided by Gamma^2 stays below 1.5");

  // rank of the modified critical matrix at the formerly ill-posed locus:
  // the acoustic row is cured (rank rises from 2 to 3), the vorticity
  // pair degeneracy is untouched by construction
  for (int s = 0; s < std::max(4, samples / 16); ++s) {
    Metric m = random_orthogonal_metric(rng);
    MeanFlow f0 = random_subsonic_flow(rng, m);
    MeanFlow f = moving_frame(m, f0);
    real l = rng.uniform(0.2, 2.0), m_wn = rng.uniform(-2.0, 2.0);
    cplx omega = illposed_frequency(m, f, l, m_wn);
    LambdaPair lp{l / omega, m_wn / omega};
    try {
      CriticalMatrix cm = critical_matrix_inflow_modified(m, f, lp);
      int r = numeric_rank(cm.C);
      rank_mod.update(r >= 3 ? 0.0 : 1.0);
      rank_mod.note("measured rank " + std::to_string(r) +
                    " at the old locus: acoustic null removed; the vorticity block stays singular");
    } catch (const Error&) {
      continue;
    }
  }

  rep.checks = {a13.finish(),   cartm.finish(), fit11.finish(),
                fit22.finish(), fit12.finish(), binom.finish(),
                rank_mod.finish(), l0.finish()};
  return rep;
}

inline std::vector<SuiteReport> verify_all(std::uint64_t seed, int samples,
                                           real tol_scale = 1.0) {
  return {verify_eigen(seed, samples, tol_scale),
          verify_dispersion(seed, samples, tol_scale),
          verify_transform(seed, std::max(8, samples / 8), tol_scale),
          verify_quasi3d(seed, std::max(8, samples / 8), tol_scale),
          verify_wellposed(seed, std::max(8, samples / 32), tol_scale),
          verify_modified(seed, std::max(16, samples / 4), tol_scale)};
}

}  // namespace curvibc
