// Run configuration: flat key = value text with [section] tables, dotted-path
// overrides, total validation before any compute.
#pragma once

#include "mss/cauchy_solver.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace mss {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct InitialStateSpec {
  std::string family = "gaussian"; // gaussian | gaussian_wave | two_gaussians | field_dump | zero
  double amplitude = 0.1, width = 1.5;
  double kx = 0, ky = 0, kz = 0;       // plane-wave factor (gaussian_wave)
  double amplitude2 = 0.05, width2 = 1.0, separation = 3.0; // two_gaussians
  double normalize_l2 = 0;             // if > 0, rescale w_plus to this L^2 norm
  std::string path;                    // field_dump
};

struct RunConfig {
  int n = 16;
  double L = 16.0;
  double beta = 0.4, alpha = 1.5, k = 2.0;
  SolverConfig solver;
  InitialStateSpec initial;
  std::string scenario;
  std::uint64_t seed = 1;
  std::string out_dir;
  double t0_factor = 3.0; // finite_t0_crosscheck pins data at t0_factor * T
};

// parse "[section]\nkey = value" / "section.key = value" text; '#' comments
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

// strict: unknown keys and malformed values are ConfigErrors; overrides win
RunConfig build_run_config(const std::map<std::string, std::string>& file_kv,
                           const std::map<std::string, std::string>& overrides);
// all dotted keys the config (and hence the CLI) accepts
const std::vector<std::string>& known_config_keys();

ComplexScalarField make_initial_state(const RunConfig& cfg, const SpectralGrid& g);

// config as archived into out_dir (canonical dotted form, sorted)
std::string render_config(const RunConfig& cfg);

} // namespace mss
