// msscatter: run one scenario from a config file, with dotted-path overrides.
#include "mss/scenarios.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"modified wave operators for the Maxwell-Schrodinger system"};

  std::string config_path, scenario, out_dir;
  app.add_option("--config", config_path, "config file (key = value text)")->required();
  app.add_option("--scenario", scenario,
                 "identities | fixed_point | decay_suite | finite_t0_crosscheck | energy_drift")
      ->required();
  app.add_option("--out-dir", out_dir, "artifact directory")->required();

  // every config key is also a flag; flags win over the file
  auto values = std::make_shared<std::map<std::string, std::string>>();
  for (const std::string& key : mss::known_config_keys()) {
    if (key == "scenario" || key == "out_dir") continue;
    app.add_option_function<std::string>(
        "--" + key, [values, key](const std::string& v) { (*values)[key] = v; },
        "override config key " + key);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::map<std::string, std::string> file_kv = mss::parse_config_file(config_path);
    (*values)["scenario"] = scenario;
    (*values)["out_dir"] = out_dir;
    mss::RunConfig cfg = mss::build_run_config(file_kv, *values);
    return mss::run_scenario(cfg);
  } catch (const mss::ConfigError& e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return mss::kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return mss::kExitIO;
  }
}
