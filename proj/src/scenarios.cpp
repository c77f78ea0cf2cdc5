#include "mss/scenarios.hpp"

#include "mss/checks.hpp"
#include "mss/report.hpp"
#include "mss/util.hpp"
#include "mss/wave_operator.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace mss {

namespace {

struct ScenarioOutput {
  Json report;
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
  bool pass = true;
};

Json check_json(const std::string& name, double value, double tol, bool pass) {
  return Json{{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}};
}

Json check_json(const CheckResult& c) { return check_json(c.name, c.value, c.tolerance, c.pass); }

// gauge structure at every node: B_b stays solenoidal, sigma stays a gradient
void gauge_invariants(const Trajectory& traj, Json& inv, bool& pass) {
  double div_val = 0, div_scale = 0, curl_val = 0, curl_scale = 0;
  for (const AuxState& st : traj.states) {
    div_val = std::max(div_val, max_divergence(st.B_b));
    div_scale = std::max(div_scale, max_abs(st.B_b));
    curl_val = std::max(curl_val, max_curl(st.sigma));
    curl_scale = std::max(curl_scale, max_abs(st.sigma));
  }
  bool ok_div = div_val <= 1e-10 * div_scale || div_scale == 0.0;
  bool ok_curl = curl_val <= 1e-8 * curl_scale || curl_scale == 0.0;
  inv.push_back(check_json("div_Bb", div_val, 1e-10 * div_scale, ok_div));
  inv.push_back(check_json("curl_sigma", curl_val, 1e-8 * curl_scale, ok_curl));
  pass = pass && ok_div && ok_curl;
}

// |u|_2 = |v|_2 is exact through M, D; the comoving L^2 norm must be a
// constant of the assembled solution
void l2_invariant(const PhysicalSolution& sol, Json& inv, bool& pass) {
  double ref = l2_norm(sol.v.front()), drift = 0;
  for (const auto& v : sol.v) drift = std::max(drift, std::abs(l2_norm(v) - ref));
  bool ok = ref == 0.0 ? drift == 0.0 : drift <= 1e-8 * ref;
  inv.push_back(check_json("l2_norm_constant", drift, 1e-8 * ref, ok));
  pass = pass && ok;
}

Json iterations_json(const std::vector<IterationReport>& history) {
  Json arr = Json::array();
  for (const IterationReport& it : history)
    arr.push_back(Json{{"iterate", it.iterate_index},
                       {"Y", it.Y},
                       {"Y1", it.Y1},
                       {"Z0", it.Z0},
                       {"Z1", it.Z1},
                       {"Z2", it.Z2},
                       {"N", it.N},
                       {"distance", it.distance},
                       {"contraction_ratio", it.contraction_ratio}});
  return arr;
}

Json fits_json(const std::vector<DecayFit>& fits) {
  Json arr = Json::array();
  for (const DecayFit& f : fits)
    arr.push_back(Json{{"series", f.series_name},
                       {"exponent", f.exponent},
                       {"log_power", f.log_power},
                       {"r_squared", f.r_squared},
                       {"t_lo", f.t_lo},
                       {"t_hi", f.t_hi},
                       {"expected", f.expected},
                       {"zero_series", f.zero_series}});
  return arr;
}

struct Pipeline {
  SpectralGrid grid;
  std::shared_ptr<const ProfileTable> prof;
  Trajectory traj;
  std::vector<IterationReport> history;
};

Pipeline solve_pipeline(const RunConfig& cfg) {
  Pipeline p;
  p.grid = SpectralGrid{cfg.n, cfg.L};
  ComplexScalarField w_plus = make_initial_state(cfg, p.grid);
  AsymptoticState st = AsymptoticState::make(std::move(w_plus), cfg.alpha, cfg.beta, cfg.k);
  p.prof = make_profile(st, p.grid, cfg.solver);
  p.traj = solve_at_infinity(p.prof, cfg.solver, &p.history);
  return p;
}

ScenarioOutput run_identities(const RunConfig& cfg) {
  ScenarioOutput out;
  SpectralGrid g{cfg.n, cfg.L};
  std::vector<CheckResult> checks = run_identity_checks(g, cfg.seed);
  Json arr = Json::array();
  out.csv_header = {"check_index", "value"};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    arr.push_back(check_json(checks[i]));
    out.csv_rows.push_back({double(i), checks[i].value});
    out.pass = out.pass && checks[i].pass;
  }
  out.report["checks"] = arr;
  return out;
}

ScenarioOutput run_fixed_point(const RunConfig& cfg) {
  ScenarioOutput out;
  Pipeline p = solve_pipeline(cfg);
  out.report["iterations"] = iterations_json(p.history);

  auto [rq, rs] = trajectory_residual(p.traj, cfg.solver);
  out.report["residuals"] = Json{{"trajectory_q", rq}, {"trajectory_sigma", rs}};

  Json inv = Json::array();
  gauge_invariants(p.traj, inv, out.pass);
  out.report["invariants"] = inv;

  save_trajectory(cfg.out_dir + "/trajectory", p.traj);

  const double k = cfg.k;
  out.csv_header = {"t", "q_hk", "sigma_kk", "bb_kk1"};
  for (int i = 0; i < p.traj.window_nodes(); ++i) {
    const AuxState& st = p.traj.states[i];
    out.csv_rows.push_back({st.t, norm(st.q, {NormSpec::Hk, k}),
                            norm(st.sigma, {NormSpec::Kk, k}),
                            norm(st.B_b, {NormSpec::Kk, k + 1})});
  }
  return out;
}

ScenarioOutput run_decay_suite(const RunConfig& cfg) {
  ScenarioOutput out;
  Pipeline p = solve_pipeline(cfg);
  out.report["iterations"] = iterations_json(p.history);

  PhysicalSolution sol = assemble_solution(p.traj, cfg.solver);
  out.report["fits"] = fits_json(verify_asymptotics(sol));

  int mid = p.traj.window_nodes() / 2;
  ResidualPair res = ms_residual(sol, mid);
  auto [rq, rs] = trajectory_residual(p.traj, cfg.solver);
  out.report["residuals"] = Json{{"schrodinger", res.schrodinger},
                                 {"maxwell", res.maxwell},
                                 {"trajectory_q", rq},
                                 {"trajectory_sigma", rs}};

  Json inv = Json::array();
  gauge_invariants(p.traj, inv, out.pass);
  l2_invariant(sol, inv, out.pass);
  out.report["invariants"] = inv;

  save_trajectory(cfg.out_dir + "/trajectory", p.traj);

  NormSeries ser = asymptotic_series(sol);
  out.csv_header = {"t"};
  for (const std::string& name : ser.names) out.csv_header.push_back(name);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    std::vector<double> row = {sol.times[i]};
    for (const auto& s : ser.values) row.push_back(s[i]);
    out.csv_rows.push_back(std::move(row));
  }
  return out;
}

ScenarioOutput run_finite_t0(const RunConfig& cfg) {
  ScenarioOutput out;
  Pipeline p = solve_pipeline(cfg);
  out.report["iterations"] = iterations_json(p.history);

  // reseed from the node nearest t0_factor * T and re-solve forward/backward
  double t0 = cfg.t0_factor * cfg.solver.T;
  int idx = 0;
  for (int i = 0; i < p.traj.window_nodes(); ++i)
    if (std::abs(std::log(p.traj.times[i] / t0)) <
        std::abs(std::log(p.traj.times[idx] / t0)))
      idx = i;
  t0 = p.traj.times[idx];
  Trajectory re = solve_finite_t0(p.prof, t0, p.traj.states[idx], cfg.solver);

  // uniqueness is asserted on the reported window: beyond T_max the weight
  // t/ln t amplifies the integrator slack of the open-ended forward leg
  auto windowed = [](Trajectory tr) {
    int nw = tr.window_nodes();
    tr.times.resize(nw);
    tr.lnt.resize(nw);
    tr.states.resize(nw);
    return tr;
  };
  double dist = weighted_distance(windowed(p.traj), windowed(re));
  double budget = 10.0 * cfg.solver.step_tol;
  bool ok = dist <= budget;
  out.pass = out.pass && ok;
  out.report["crosscheck"] =
      Json{{"t0", t0}, {"distance", dist}, {"budget", budget}, {"pass", ok}};

  Json inv = Json::array();
  gauge_invariants(re, inv, out.pass);
  out.report["invariants"] = inv;

  const double k = cfg.k;
  out.csv_header = {"t", "q_hk_infinity", "q_hk_reseeded", "q_hk_difference"};
  for (int i = 0; i < p.traj.window_nodes(); ++i) {
    const AuxState& a = p.traj.states[i];
    const AuxState& b = re.states[i];
    out.csv_rows.push_back({a.t, norm(a.q, {NormSpec::Hk, k}), norm(b.q, {NormSpec::Hk, k}),
                            norm(a.q - b.q, {NormSpec::Hk, k})});
  }
  return out;
}

ScenarioOutput run_energy_drift(const RunConfig& cfg) {
  ScenarioOutput out;
  Pipeline p = solve_pipeline(cfg);
  out.report["iterations"] = iterations_json(p.history);

  PhysicalSolution sol = assemble_solution(p.traj, cfg.solver);
  int nw = int(sol.times.size());
  int lo = 2, hi = nw - 3; // the time stencils need two neighbors each side
  int mid = nw / 2;
  ResidualPair res = ms_residual(sol, std::min(std::max(mid, lo), hi));
  out.report["residuals"] = Json{{"schrodinger", res.schrodinger}, {"maxwell", res.maxwell}};

  double ref = 0, max_drift = 0;
  out.csv_header = {"t", "energy"};
  for (int i = lo; i <= hi; ++i) {
    double e = compute_energy(sol, i);
    if (i == lo) ref = e;
    max_drift = std::max(max_drift, std::abs(e - ref));
    out.csv_rows.push_back({sol.times[i], e});
  }
  double decades = std::log10(sol.times[hi] / sol.times[lo]);
  double drift_per_decade = max_drift / decades;
  double budget = 10.0 * (res.schrodinger + res.maxwell);
  bool ok = drift_per_decade <= budget;
  out.pass = out.pass && ok;
  out.report["energy"] = Json{{"reference", ref},
                              {"max_drift", max_drift},
                              {"drift_per_decade", drift_per_decade},
                              {"budget", budget}};

  Json inv = Json::array();
  gauge_invariants(p.traj, inv, out.pass);
  l2_invariant(sol, inv, out.pass);
  out.report["invariants"] = inv;
  return out;
}

int emit(const RunConfig& cfg, ScenarioOutput& out) {
  out.report["scenario"] = cfg.scenario;
  out.report["pass"] = out.pass;
  out.report["grid"] = Json{{"n", cfg.n}, {"L", cfg.L}};
  Json config_obj = Json::object();
  for (const auto& [key, val] : parse_config_text(render_config(cfg))) config_obj[key] = val;
  out.report["config"] = config_obj;
  write_report(cfg.out_dir, out.report);
  if (!out.csv_header.empty())
    write_csv(cfg.out_dir + "/series.csv", out.csv_header, out.csv_rows);
  print_summary(out.report);
  return out.pass ? kExitPass : kExitTolerance;
}

} // namespace

int run_scenario(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create out_dir '%s': %s\n", cfg.out_dir.c_str(),
                 ec.message().c_str());
    return kExitIO;
  }
  {
    std::ofstream f(cfg.out_dir + "/config.txt");
    f << render_config(cfg);
    if (!f) {
      std::fprintf(stderr, "error: cannot archive config into '%s'\n", cfg.out_dir.c_str());
      return kExitIO;
    }
  }

  ScenarioOutput out;
  try {
    if (cfg.scenario == "identities")
      out = run_identities(cfg);
    else if (cfg.scenario == "fixed_point")
      out = run_fixed_point(cfg);
    else if (cfg.scenario == "decay_suite")
      out = run_decay_suite(cfg);
    else if (cfg.scenario == "finite_t0_crosscheck")
      out = run_finite_t0(cfg);
    else if (cfg.scenario == "energy_drift")
      out = run_energy_drift(cfg);
    else
      throw ConfigError("unknown scenario: " + cfg.scenario);
  } catch (const NonContractionError& e) {
    Json report;
    report["scenario"] = cfg.scenario;
    report["pass"] = false;
    Json notes = Json::array();
    notes.push_back("fixed point not contracting; ratio history follows");
    for (double r : e.ratios) notes.push_back("contraction_ratio " + fmt_g17(r));
    report["notes"] = notes;
    try {
      write_report(cfg.out_dir, report);
    } catch (const std::exception&) {
    }
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonContraction;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitTolerance;
  }

  try {
    return emit(cfg, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: emission failed: %s\n", e.what());
    return kExitIO;
  }
}

} // namespace mss
