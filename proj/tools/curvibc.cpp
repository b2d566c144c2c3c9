// Command-line front end: verification suites, pointwise boundary
// analysis, simulation runs, and run-comparison reports.
//
// Exit codes: 0 all checks passed, 1 assertion or domain failure,
// 2 usage/config error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "curvibc/bc_modified.hpp"
#include "curvibc/grid.hpp"
#include "curvibc/sim.hpp"
#include "curvibc/verify.hpp"
#include "curvibc/wellposedness.hpp"

using json = nlohmann::json;
using namespace curvibc;

namespace {

Metric parse_metric(const std::string& spec) {
  if (spec == "cartesian") return Metric::cartesian();
  std::vector<real> v;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
  require(v.size() == 9, "ConfigError",
          "--metric wants 'cartesian' or nine comma-separated components");
  Metric m{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
  m.validate();
  return m;
}

json check_to_json(const CheckResult& c) {
  json j{{"name", c.name},
         {"samples", c.samples},
         {"measured", c.measured},
         {"tolerance", c.tolerance},
         {"pass", c.pass}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

json report_to_json(const SuiteReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_to_json(c));
  return json{{"suite", r.suite}, {"seed", r.seed}, {"pass", r.pass()}, {"checks", checks}};
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  require(out.good(), "ConfigError", "cannot write '" + path + "'");
  out << text << "\n";
}

std::string report_csv(const std::vector<SuiteReport>& reports) {
  std::ostringstream os;
  os << "suite,check,samples,measured,tolerance,pass,note\n";
  for (const auto& r : reports)
    for (const auto& c : r.checks)
      os << r.suite << "," << c.name << "," << c.samples << "," << c.measured << ","
         << c.tolerance << "," << (c.pass ? 1 : 0) << ",\"" << c.note << "\"\n";
  return os.str();
}

// --------------------------------------------------------------------------
// simulate config files: `key = value` lines, '#' comments, unknown keys
// rejected
// --------------------------------------------------------------------------
SimConfig parse_sim_config(const std::string& path, std::uint64_t* seed_out,
                           std::string* canonical) {
  std::ifstream in(path);
  require(in.good(), "ConfigError", "cannot open config '" + path + "'");
  SimConfig cfg;
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    require(!kv.count(key), "ConfigError", "duplicate key '" + key + "'");
    kv[key] = val;
  }

  auto num = [&](const std::string& k, real dflt) {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : std::stod(it->second);
  };
  auto str = [&](const std::string& k, std::string dflt) {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  };

  static const std::set<std::string> known = {
      "ni", "nj", "nk", "mapping", "grid_file", "u", "v", "w",
      "bc_left", "bc_right", "pulse_type", "pulse_upstream", "pulse_center",
      "pulse_width", "pulse_amplitude", "pulse_angle_deg", "pulse_tangential_mode",
      "dt", "n_steps", "cfl", "filter_strength", "probe_planes", "t_split",
      "threads", "seed"};
  for (const auto& [k, v] : kv)
    require(known.count(k) || k.rfind("map_", 0) == 0, "ConfigError",
            "unknown config key '" + k + "'");

  cfg.dims.ni = (int)num("ni", 64);
  cfg.dims.nj = (int)num("nj", 32);
  cfg.dims.nk = (int)num("nk", 32);
  cfg.mapping = str("mapping", "identity");
  cfg.grid_file = str("grid_file", "");
  for (const auto& [k, v] : kv)
    if (k.rfind("map_", 0) == 0) cfg.mapping_params[k.substr(4)] = std::stod(v);
  cfg.flow = MeanFlow::nondimensional(num("u", 0.5), num("v", 0.0), num("w", 0.0));
  cfg.bc_left = bc_kind_from_string(str("bc_left", "first_order"));
  cfg.bc_right = bc_kind_from_string(str("bc_right", "first_order"));
  cfg.pulse.type = str("pulse_type", "acoustic");
  cfg.pulse.upstream = num("pulse_upstream", 0) != 0;
  cfg.pulse.center = num("pulse_center", cfg.pulse.upstream ? 0.55 : 0.35);
  cfg.pulse.width = num("pulse_width", cfg.pulse.upstream ? 0.1 : 0.15);
  cfg.pulse.amplitude = num("pulse_amplitude", 1e-4);
  cfg.pulse.angle_deg = num("pulse_angle_deg", 0.0);
  cfg.pulse.tangential_mode = (int)num("pulse_tangential_mode", 2);
  cfg.dt = num("dt", 0.0);
  cfg.n_steps = (int)num("n_steps", 0);
  cfg.cfl_target = num("cfl", 0.7);
  cfg.filter_strength = num("filter_strength", 0.1);
  cfg.t_split = num("t_split", -1.0);
  cfg.threads = (int)num("threads", 0);
  if (kv.count("probe_planes")) {
    std::stringstream ss(kv["probe_planes"]);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.probe_planes.push_back(std::stoi(tok));
  }
  *seed_out = (std::uint64_t)num("seed", 0);

  // canonical text for the config hash: sorted key=value lines
  std::ostringstream cs;
  for (const auto& [k, v] : kv) cs << k << "=" << v << "\n";
  *canonical = cs.str();
  return cfg;
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, int samples,
               real tol_scale, const std::string& format, const std::string& out) {
  std::vector<SuiteReport> reports;
  if (suite == "eigen")
    reports.push_back(verify_eigen(seed, samples, tol_scale));
  else if (suite == "dispersion")
    reports.push_back(verify_dispersion(seed, samples, tol_scale));
  else if (suite == "transform")
    reports.push_back(verify_transform(seed, samples, tol_scale));
  else if (suite == "quasi3d")
    reports.push_back(verify_quasi3d(seed, std::max(8, samples / 8), tol_scale));
  else if (suite == "wellposed")
    reports.push_back(verify_wellposed(seed, std::max(8, samples / 32), tol_scale));
  else if (suite == "modified")
    reports.push_back(verify_modified(seed, std::max(16, samples / 4), tol_scale));
  else if (suite == "all")
    reports = verify_all(seed, samples, tol_scale);
  else
    fail("ConfigError", "unknown suite '" + suite + "'");

  bool pass = true;
  for (const auto& r : reports) pass = pass && r.pass();
  if (format == "csv") {
    write_out(out, report_csv(reports));
  } else {
    json j = json::array();
    for (const auto& r : reports) j.push_back(report_to_json(r));
    write_out(out, j.dump(2));
  }
  return pass ? 0 : 1;
}

json operator_to_json(const BCOperator& op) {
  auto rows = [&](const std::array<Vec5, 4>& rr) {
    json a = json::array();
    for (int i = 0; i < op.r; ++i) {
      json row = json::array();
      for (int c = 0; c < 5; ++c) row.push_back(rr[i](c, 0));
      a.push_back(row);
    }
    return a;
  };
  return json{{"side", op.side == Side::inflow ? "inflow" : "outflow"},
              {"basis", op.basis == Basis::primitive ? "primitive" : "characteristic"},
              {"rows", op.r},
              {"time", rows(op.time_rows)},
              {"g", rows(op.G)},
              {"h", rows(op.H)}};
}

int cmd_analyze(const Metric& m, const MeanFlow& flow, real l, real m_wn,
                real omega_re, real omega_im, bool modified, bool tables,
                const std::string& out) {
  json j;
  cplx omega(omega_re, omega_im);
  RootSet rs = roots_k(m, flow, l, m_wn, omega);
  json roots = json::array();
  for (int n = 0; n < 5; ++n)
    roots.push_back({{"mode", n + 1},
                     {"k_re", rs.k[n].real()},
                     {"k_im", rs.k[n].imag()},
                     {"kind", to_string(rs.kind[n])},
                     {"incoming_at",
                      rs.incoming[n] == IncomingSide::inflow ? "inflow" : "outflow"}});
  j["roots"] = roots;
  j["supersonic"] = rs.supersonic;

  if (omega != cplx(0)) {
    LambdaPair lp{l / omega, m_wn / omega};
    json modes = json::array();
    for (int n = 1; n <= 5; ++n) {
      Mode md = make_mode(n, m, flow, lp);
      json right = json::array(), left = json::array();
      for (int c = 0; c < 5; ++c) {
        right.push_back({md.right(c, 0).real(), md.right(c, 0).imag()});
        left.push_back({md.left(c, 0).real(), md.left(c, 0).imag()});
      }
      modes.push_back({{"mode", n}, {"kind", to_string(md.kind)},
                       {"right", right}, {"left", left}});
    }
    j["eigenvectors"] = modes;

    MeanFlow frame = moving_frame(m, flow);
    if (in_moving_frame(m, nondimensionalize(flow))) {
      CriticalMatrix cm = critical_matrix_inflow(m, frame, lp);
      j["critical_matrix"] = {{"rank", numeric_rank(cm.C)},
                              {"abs_det", std::abs(lu_det(cm.C))}};
    }
  }
  if (is_orthogonal(m)) {
    InflowFinding f = detect_illposed_inflow(m, flow, l, m_wn);
    j["illposed_inflow"] = {{"omega_im", f.omega.imag()},
                            {"rank", f.rank},
                            {"illposed", f.illposed},
                            {"k4_star_re", f.k4_star.real()},
                            {"note", f.note}};
  }
  if (tables) {
    json t;
    for (auto basis : {Basis::primitive, Basis::characteristic}) {
      const char* bname = basis == Basis::primitive ? "primitive" : "characteristic";
      t[bname] = {
          {"inflow_quasi3d", operator_to_json(build_quasi3d(m, flow, Side::inflow, basis))},
          {"outflow_quasi3d", operator_to_json(build_quasi3d(m, flow, Side::outflow, basis))},
          {"inflow_first_order", operator_to_json(build_first_order(m, flow, Side::inflow, basis))}};
      try {
        t[bname]["inflow_modified"] = operator_to_json(build_modified(m, flow, basis));
      } catch (const Error& e) {
        t[bname]["inflow_modified"] = {{"error", e.kind()}};
      }
    }
    j["operators"] = t;
  }
  if (modified) {
    ModCoefficients c = compute_m(m, flow);
    j["modified"] = {{"m1", c.m1}, {"m2", c.m2}, {"A1", c.A1}, {"A2", c.A2},
                     {"A3", c.A3}};
    if (is_orthogonal(m)) {
      MeanFlow frame = moving_frame(m, flow);
      cplx om = illposed_frequency(m, frame, l, m_wn);
      if (std::abs(om) > 0) {
        LambdaPair lp{l / om, m_wn / om};
        CriticalMatrix cm = critical_matrix_inflow_modified(m, frame, lp);
        j["modified"]["rank_at_old_locus"] = numeric_rank(cm.C);
      }
    }
  }
  write_out(out, j.dump(2));
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  std::uint64_t seed = 0;
  std::string canonical;
  SimConfig cfg = parse_sim_config(config_path, &seed, &canonical);
  RunResult r = run_simulation(cfg);

  std::filesystem::create_directories(out_dir);
  for (const auto& hist : r.probes) {
    std::ofstream csv(out_dir + "/probe_" + std::to_string(hist.plane) + ".csv");
    csv.precision(17);
    csv << "t,rho,u,v,w,p\n";
    for (const auto& s : hist.samples)
      csv << s.t << "," << s.rho << "," << s.u << "," << s.v << "," << s.w << ","
          << s.p << "\n";
  }

  json refl = json::array();
  for (const auto& rr : r.reflection)
    refl.push_back({{"plane", rr.plane},
                    {"incident", rr.incident},
                    {"reflected", rr.reflected},
                    {"ratio", rr.ratio},
                    {"t_split", rr.t_split}});
  json summary{{"config_hash", fnv1a_hex(canonical)},
               {"seed", seed},
               {"results",
                {{"reflection", refl},
                 {"steps", r.steps},
                 {"t_final", r.t_final},
                 {"cfl", r.cfl},
                 {"bc_left", to_string(cfg.bc_left)},
                 {"bc_right", to_string(cfg.bc_right)},
                 {"pulse_angle_deg", cfg.pulse.angle_deg}}},
               {"metadata",
                {{"timestamp",
                  (long long)std::chrono::duration_cast<std::chrono::seconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count()}}}};
  std::ofstream js(out_dir + "/summary.json");
  js << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& format,
               const std::string& out) {
  json rows = json::array();
  std::ostringstream csv;
  csv << "run,bc_left,bc_right,angle_deg,plane,incident,reflected,ratio\n";
  for (const auto& path : runs) {
    std::ifstream in(path);
    require(in.good(), "ConfigError", "cannot open '" + path + "'");
    json j = json::parse(in);
    for (const auto& rr : j["results"]["reflection"]) {
      rows.push_back({{"run", path},
                      {"bc_left", j["results"]["bc_left"]},
                      {"bc_right", j["results"]["bc_right"]},
                      {"angle_deg", j["results"]["pulse_angle_deg"]},
                      {"plane", rr["plane"]},
                      {"ratio", rr["ratio"]}});
      csv << path << "," << j["results"]["bc_left"].get<std::string>() << ","
          << j["results"]["bc_right"].get<std::string>() << ","
          << j["results"]["pulse_angle_deg"].get<real>() << "," << rr["plane"] << ","
          << rr["incident"].get<real>() << "," << rr["reflected"].get<real>() << ","
          << rr["ratio"].get<real>() << "\n";
    }
  }
  write_out(out, format == "csv" ? csv.str() : json{{"runs", rows}}.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonreflecting boundary conditions for the curvilinear linearized Euler equations"};
  app.require_subcommand(1);

  // verify
  std::string suite = "all", v_format = "json", v_out;
  std::uint64_t seed = 0;
  int samples = 1000;
  real tol_scale = 1.0;
  auto* verify = app.add_subcommand("verify", "run a seeded invariant suite");
  verify->add_option("--suite", suite,
                     "eigen|dispersion|transform|quasi3d|wellposed|modified|all");
  verify->add_option("--seed", seed, "rng seed (splitmix64)")->required();
  verify->add_option("--samples", samples, "sample count");
  verify->add_option("--tol-scale", tol_scale, "multiply all tolerances");
  verify->add_option("--format", v_format, "json|csv");
  verify->add_option("--out", v_out, "output path (default stdout)");

  // analyze
  std::string metric_spec = "cartesian", a_out;
  real u = 0.5, vv = 0.0, w = 0.0, l = 0.0, m_wn = 0.0, omega_re = 1.0, omega_im = 0.0;
  bool modified = false, tables = false;
  auto* analyze = app.add_subcommand("analyze", "pointwise roots, modes, well-posedness");
  analyze->add_option("--metric", metric_spec, "'cartesian' or 9 components xi_x,...,zeta_z");
  analyze->add_option("--u", u, "mean x-velocity (nondimensional)");
  analyze->add_option("--v", vv, "mean y-velocity");
  analyze->add_option("--w", w, "mean z-velocity");
  analyze->add_option("--l", l, "eta wavenumber");
  analyze->add_option("--m", m_wn, "zeta wavenumber");
  analyze->add_option("--omega", omega_re, "frequency (real part)");
  analyze->add_option("--omega-im", omega_im, "frequency (imaginary part)");
  analyze->add_flag("--modified", modified, "include m1/m2/A2 and the modified rank");
  analyze->add_flag("--tables", tables, "dump the boundary-operator tables as JSON");
  analyze->add_option("--out", a_out, "output path (default stdout)");

  // simulate
  std::string config_path, out_dir = "run";
  auto* simulate = app.add_subcommand("simulate", "run a configured reflection experiment");
  simulate->add_option("--config", config_path, "config file")->required();
  simulate->add_option("--out", out_dir, "output directory");

  // report
  std::vector<std::string> runs;
  std::string r_format = "csv", r_out;
  auto* report = app.add_subcommand("report", "aggregate run summaries");
  report->add_option("--runs", runs, "summary.json paths")->required();
  report->add_option("--format", r_format, "csv|json");
  report->add_option("--out", r_out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(suite, seed, samples, tol_scale, v_format, v_out);
    if (analyze->parsed())
      return cmd_analyze(parse_metric(metric_spec), MeanFlow::nondimensional(u, vv, w),
                         l, m_wn, omega_re, omega_im, modified, tables, a_out);
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
    if (report->parsed()) return cmd_report(runs, r_format, r_out);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == "ConfigError" || e.kind() == "UnknownMapping" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
