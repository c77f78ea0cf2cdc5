#include "mss/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mss {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " = '" + v + "' is not a number");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long i = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " = '" + v + "' is not an integer");
  }
}

} // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated [section]");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    kv[key] = val;
  }
  return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "grid.n", "grid.L",
      "physics.beta", "physics.alpha", "physics.k",
      "time.T", "time.T_max", "time.rho", "time.tail_rho", "time.tail_decades",
      "solver.tol", "solver.max_iters", "solver.under_relaxation", "solver.step_tol",
      "quad.panels", "quad.gl_order",
      "profile.nodes_per_decade",
      "initial_state.family", "initial_state.amplitude", "initial_state.width",
      "initial_state.kx", "initial_state.ky", "initial_state.kz",
      "initial_state.amplitude2", "initial_state.width2", "initial_state.separation",
      "initial_state.normalize_l2", "initial_state.path",
      "crosscheck.t0_factor",
      "scenario", "seed", "out_dir"};
  return keys;
}

RunConfig build_run_config(const std::map<std::string, std::string>& file_kv,
                           const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> kv = file_kv;
  for (const auto& [k, v] : overrides) kv[k] = v;

  const auto& known = known_config_keys();
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const auto& name : known)
      if (name == k) ok = true;
    if (!ok) throw ConfigError("config: unknown key '" + k + "'");
  }

  RunConfig cfg;
  auto get = [&kv](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto dbl = [&](const std::string& key, double& dst) {
    if (const std::string* v = get(key)) dst = parse_double(key, *v);
  };
  auto ing = [&](const std::string& key, int& dst) {
    if (const std::string* v = get(key)) dst = static_cast<int>(parse_int(key, *v));
  };
  auto str = [&](const std::string& key, std::string& dst) {
    if (const std::string* v = get(key)) dst = *v;
  };

  ing("grid.n", cfg.n);
  dbl("grid.L", cfg.L);
  dbl("physics.beta", cfg.beta);
  dbl("physics.alpha", cfg.alpha);
  dbl("physics.k", cfg.k);
  dbl("time.T", cfg.solver.T);
  dbl("time.T_max", cfg.solver.T_max);
  dbl("time.rho", cfg.solver.rho);
  dbl("time.tail_rho", cfg.solver.tail_rho);
  dbl("time.tail_decades", cfg.solver.tail_decades);
  dbl("solver.tol", cfg.solver.tol);
  ing("solver.max_iters", cfg.solver.max_iters);
  dbl("solver.under_relaxation", cfg.solver.under_relaxation);
  dbl("solver.step_tol", cfg.solver.step_tol);
  ing("quad.panels", cfg.solver.quad_panels);
  ing("quad.gl_order", cfg.solver.quad_gl);
  ing("profile.nodes_per_decade", cfg.solver.profile_nodes_per_decade);
  str("initial_state.family", cfg.initial.family);
  dbl("initial_state.amplitude", cfg.initial.amplitude);
  dbl("initial_state.width", cfg.initial.width);
  dbl("initial_state.kx", cfg.initial.kx);
  dbl("initial_state.ky", cfg.initial.ky);
  dbl("initial_state.kz", cfg.initial.kz);
  dbl("initial_state.amplitude2", cfg.initial.amplitude2);
  dbl("initial_state.width2", cfg.initial.width2);
  dbl("initial_state.separation", cfg.initial.separation);
  dbl("initial_state.normalize_l2", cfg.initial.normalize_l2);
  str("initial_state.path", cfg.initial.path);
  dbl("crosscheck.t0_factor", cfg.t0_factor);
  str("scenario", cfg.scenario);
  if (const std::string* v = get("seed")) cfg.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
  str("out_dir", cfg.out_dir);

  // total validation up front
  if (cfg.n < 4 || (cfg.n & (cfg.n - 1)) != 0)
    throw ConfigError("config: grid.n must be a power of two >= 4");
  if (!(cfg.L > 0)) throw ConfigError("config: grid.L must be positive");
  if (!(cfg.beta > 0.0 && cfg.beta < 0.5))
    throw ConfigError("config: physics.beta must lie in (0, 1/2)");
  if (!(cfg.alpha > 1.0)) throw ConfigError("config: physics.alpha must exceed 1");
  if (!(cfg.beta * (cfg.alpha + 1.0) >= 1.0))
    throw ConfigError("config: need beta*(alpha+1) >= 1");
  if (!(cfg.k > 1.5)) throw ConfigError("config: physics.k must exceed 3/2");
  if (!(cfg.solver.T > 1.5)) throw ConfigError("config: time.T must exceed 1.5");
  if (!(cfg.solver.T_max > cfg.solver.T)) throw ConfigError("config: time.T_max must exceed T");
  if (!(cfg.solver.rho > 1.0) || !(cfg.solver.tail_rho > 1.0))
    throw ConfigError("config: time.rho and time.tail_rho must exceed 1");
  if (!(cfg.solver.tail_decades >= 1.0))
    throw ConfigError("config: time.tail_decades must be >= 1");
  if (!(cfg.solver.tol > 0) || !(cfg.solver.step_tol > 0))
    throw ConfigError("config: tolerances must be positive");
  if (cfg.solver.max_iters < 1) throw ConfigError("config: solver.max_iters must be >= 1");
  if (!(cfg.solver.under_relaxation > 0 && cfg.solver.under_relaxation <= 1))
    throw ConfigError("config: solver.under_relaxation must lie in (0, 1]");
  if (cfg.solver.quad_panels < 1 || cfg.solver.quad_gl < 2)
    throw ConfigError("config: quad.panels >= 1 and quad.gl_order >= 2 required");
  if (cfg.solver.profile_nodes_per_decade < 2)
    throw ConfigError("config: profile.nodes_per_decade must be >= 2");
  static const char* scenarios[] = {"identities", "fixed_point", "decay_suite",
                                    "finite_t0_crosscheck", "energy_drift"};
  bool sc_ok = false;
  for (const char* s : scenarios)
    if (cfg.scenario == s) sc_ok = true;
  if (!sc_ok)
    throw ConfigError("config: scenario must be one of identities, fixed_point, decay_suite, "
                      "finite_t0_crosscheck, energy_drift (got '" + cfg.scenario + "')");
  if (cfg.out_dir.empty()) throw ConfigError("config: out_dir is required");
  if (cfg.scenario == "decay_suite" && !(cfg.solver.T_max / cfg.solver.T >= 10.0))
    throw ConfigError("config: decay_suite requires T_max/T >= 10");
  static const char* families[] = {"gaussian", "gaussian_wave", "two_gaussians", "field_dump",
                                   "zero"};
  bool fam_ok = false;
  for (const char* f : families)
    if (cfg.initial.family == f) fam_ok = true;
  if (!fam_ok) throw ConfigError("config: unknown initial_state.family '" + cfg.initial.family + "'");
  if (cfg.initial.family == "field_dump" && cfg.initial.path.empty())
    throw ConfigError("config: initial_state.family = field_dump needs initial_state.path");
  if (!(cfg.initial.width > 0) || !(cfg.initial.width2 > 0))
    throw ConfigError("config: initial_state widths must be positive");
  if (cfg.initial.normalize_l2 < 0)
    throw ConfigError("config: initial_state.normalize_l2 must be >= 0");
  if (!(cfg.t0_factor * cfg.solver.T >= cfg.solver.T &&
        cfg.t0_factor * cfg.solver.T <= cfg.solver.T_max))
    throw ConfigError("config: crosscheck.t0_factor*T must land inside [T, T_max]");
  return cfg;
}

ComplexScalarField make_initial_state(const RunConfig& cfg, const SpectralGrid& g) {
  ComplexScalarField f(g);
  const InitialStateSpec& is = cfg.initial;
  if (is.family == "zero") {
    return f;
  } else if (is.family == "gaussian") {
    f = gaussian_field(g, is.amplitude, is.width);
  } else if (is.family == "gaussian_wave") {
    f = gaussian_field(g, is.amplitude, is.width, {is.kx, is.ky, is.kz});
  } else if (is.family == "two_gaussians") {
    double off = 0.5 * is.separation;
    f = gaussian_field(g, is.amplitude, is.width, {is.kx, is.ky, is.kz}, {off, 0, 0});
    ComplexScalarField f2 =
        gaussian_field(g, is.amplitude2, is.width2, {-is.kx, -is.ky, -is.kz}, {-off, 0, 0});
    f = f + f2;
  } else { // field_dump
    f = read_scalar_field(is.path);
    if (f.grid != g) throw ConfigError("initial_state field dump grid does not match grid.n/L");
  }
  if (is.normalize_l2 > 0) {
    double nn = l2_norm(f);
    if (nn == 0) throw ConfigError("initial_state.normalize_l2 set but the state is zero");
    f = cdouble(is.normalize_l2 / nn, 0) * f;
  }
  return f;
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto kv = [&out](const std::string& key, const std::string& v) { out << key << " = " << v << "\n"; };
  auto num = [&kv](const std::string& key, double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    kv(key, s.str());
  };
  kv("crosscheck.t0_factor", std::to_string(cfg.t0_factor));
  kv("grid.L", std::to_string(cfg.L));
  kv("grid.n", std::to_string(cfg.n));
  kv("initial_state.amplitude", std::to_string(cfg.initial.amplitude));
  kv("initial_state.amplitude2", std::to_string(cfg.initial.amplitude2));
  kv("initial_state.family", cfg.initial.family);
  num("initial_state.kx", cfg.initial.kx);
  num("initial_state.ky", cfg.initial.ky);
  num("initial_state.kz", cfg.initial.kz);
  num("initial_state.normalize_l2", cfg.initial.normalize_l2);
  if (!cfg.initial.path.empty()) kv("initial_state.path", cfg.initial.path);
  num("initial_state.separation", cfg.initial.separation);
  num("initial_state.width", cfg.initial.width);
  num("initial_state.width2", cfg.initial.width2);
  num("physics.alpha", cfg.alpha);
  num("physics.beta", cfg.beta);
  num("physics.k", cfg.k);
  kv("profile.nodes_per_decade", std::to_string(cfg.solver.profile_nodes_per_decade));
  kv("quad.gl_order", std::to_string(cfg.solver.quad_gl));
  kv("quad.panels", std::to_string(cfg.solver.quad_panels));
  kv("scenario", cfg.scenario);
  kv("seed", std::to_string(cfg.seed));
  kv("solver.max_iters", std::to_string(cfg.solver.max_iters));
  num("solver.step_tol", cfg.solver.step_tol);
  num("solver.tol", cfg.solver.tol);
  num("solver.under_relaxation", cfg.solver.under_relaxation);
  num("time.T", cfg.solver.T);
  num("time.T_max", cfg.solver.T_max);
  num("time.rho", cfg.solver.rho);
  num("time.tail_decades", cfg.solver.tail_decades);
  num("time.tail_rho", cfg.solver.tail_rho);
  kv("out_dir", cfg.out_dir);
  return out.str();
}

} // namespace mss
