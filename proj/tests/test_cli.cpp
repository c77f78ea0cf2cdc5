#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mss/config.hpp"
#include "mss/report.hpp"
#include "mss/scenarios.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace mss;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

RunConfig zero_run(const std::string& scenario, const std::string& out_dir) {
  std::map<std::string, std::string> kv = {
      {"scenario", scenario},       {"out_dir", out_dir},
      {"initial_state.family", "zero"}, {"grid.n", "8"},
      {"time.T", "20"},             {"time.T_max", "200"},
      {"time.tail_decades", "2"},   {"profile.nodes_per_decade", "4"},
      {"quad.panels", "2"},         {"quad.gl_order", "4"},
  };
  return build_run_config(kv, {});
}

} // namespace

TEST_CASE("config text parsing") {
  std::string text =
      "# comment\n"
      "scenario = identities\n"
      "\n"
      "[grid]\n"
      "n = 32   # trailing comment\n"
      "L = 16.0\n"
      "[time]\n"
      "T = 20\n"
      "physics.beta = 0.4\n";
  auto kv = parse_config_text(text);
  CHECK(kv.at("scenario") == "identities");
  CHECK(kv.at("grid.n") == "32");
  CHECK(kv.at("grid.L") == "16.0");
  CHECK(kv.at("time.T") == "20");
  CHECK(kv.at("physics.beta") == "0.4"); // already-dotted keys bypass the open section
  CHECK_THROWS_AS(parse_config_text("[grid\nn = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("= 3\n"), ConfigError);
}

TEST_CASE("config building and validation") {
  std::map<std::string, std::string> base = {{"scenario", "fixed_point"}, {"out_dir", "/tmp/x"}};
  RunConfig cfg = build_run_config(base, {});
  CHECK(cfg.n == 16);
  CHECK(cfg.solver.T == 20);
  CHECK(cfg.beta == 0.4);

  // overrides win over file values
  RunConfig over = build_run_config(base, {{"grid.n", "32"}, {"physics.k", "2.5"}});
  CHECK(over.n == 32);
  CHECK(over.k == 2.5);

  auto with = [&base](const std::string& k, const std::string& v) {
    auto kv = base;
    kv[k] = v;
    return kv;
  };
  CHECK_THROWS_AS(build_run_config(with("grid.m", "8"), {}), ConfigError);   // unknown key
  CHECK_THROWS_AS(build_run_config(with("grid.n", "12"), {}), ConfigError);  // not a power of 2
  CHECK_THROWS_AS(build_run_config(with("grid.n", "1x"), {}), ConfigError);  // not a number
  CHECK_THROWS_AS(build_run_config(with("physics.beta", "0.6"), {}), ConfigError);
  // beta (alpha + 1) >= 1 must hold jointly
  auto kv = base;
  kv["physics.beta"] = "0.3";
  kv["physics.alpha"] = "1.5";
  CHECK_THROWS_AS(build_run_config(kv, {}), ConfigError);
  kv["physics.alpha"] = "2.5";
  CHECK_NOTHROW(build_run_config(kv, {}));
  CHECK_THROWS_AS(build_run_config(with("scenario", "everything"), {}), ConfigError);
  CHECK_THROWS_AS(build_run_config({{"scenario", "fixed_point"}}, {}), ConfigError); // no out_dir
  // decay_suite needs a decade of window
  auto ds = with("scenario", "decay_suite");
  ds["time.T"] = "20";
  ds["time.T_max"] = "100";
  CHECK_THROWS_AS(build_run_config(ds, {}), ConfigError);
  ds["time.T_max"] = "200";
  CHECK_NOTHROW(build_run_config(ds, {}));
  CHECK_THROWS_AS(build_run_config(with("initial_state.family", "field_dump"), {}),
                  ConfigError); // needs a path
}

TEST_CASE("rendered config round-trips") {
  std::map<std::string, std::string> kv = {{"scenario", "identities"},
                                           {"out_dir", "/tmp/y"},
                                           {"grid.n", "32"},
                                           {"initial_state.family", "gaussian_wave"},
                                           {"initial_state.kx", "0.5"},
                                           {"seed", "7"}};
  RunConfig cfg = build_run_config(kv, {});
  std::string text = render_config(cfg);
  RunConfig back = build_run_config(parse_config_text(text), {});
  CHECK(render_config(back) == text);
  CHECK(back.n == 32);
  CHECK(back.seed == 7);
  CHECK(back.initial.kx == 0.5);
}

TEST_CASE("initial state families") {
  SpectralGrid g{16, 16.0};
  RunConfig cfg = build_run_config({{"scenario", "fixed_point"}, {"out_dir", "/tmp/z"}}, {});

  cfg.initial.family = "zero";
  CHECK(max_abs(make_initial_state(cfg, g)) == 0.0);

  cfg.initial.family = "gaussian";
  cfg.initial.amplitude = 0.3;
  cfg.initial.width = 1.5;
  ComplexScalarField f = make_initial_state(cfg, g);
  CHECK(f.at(g.n / 2, g.n / 2, g.n / 2).real() == doctest::Approx(0.3).epsilon(1e-12));

  cfg.initial.family = "gaussian_wave";
  cfg.initial.kx = 0.7;
  ComplexScalarField fw = make_initial_state(cfg, g);
  for (std::size_t m = 0; m < f.v.size(); m += 131)
    CHECK(std::abs(fw.v[m]) == doctest::Approx(std::abs(f.v[m])).epsilon(1e-12));

  cfg.initial.family = "two_gaussians";
  ComplexScalarField f2 = make_initial_state(cfg, g);
  CHECK(max_abs(f2) > 0);

  cfg.initial.family = "gaussian";
  cfg.initial.normalize_l2 = 0.1;
  CHECK(l2_norm(make_initial_state(cfg, g)) == doctest::Approx(0.1).epsilon(1e-12));
  cfg.initial.normalize_l2 = 0;

  // dump round trip and grid mismatch
  write_field("/tmp/mss_cli_state.fld", f);
  cfg.initial.family = "field_dump";
  cfg.initial.path = "/tmp/mss_cli_state.fld";
  ComplexScalarField fd = make_initial_state(cfg, g);
  CHECK(max_abs(fd - f) == 0.0);
  SpectralGrid g2{32, 16.0};
  CHECK_THROWS_AS(make_initial_state(cfg, g2), ConfigError);
  std::remove("/tmp/mss_cli_state.fld");
}

TEST_CASE("report schema validation") {
  Json good = {{"schema_version", kReportSchemaVersion},
               {"scenario", "identities"},
               {"pass", true},
               {"checks", Json::array({Json{{"name", "a"}, {"value", 0.5}, {"tolerance", 1.0},
                                            {"pass", true}}})}};
  CHECK(validate_report(good, report_schema()).empty());

  Json bad_enum = good;
  bad_enum["scenario"] = "everything";
  CHECK_FALSE(validate_report(bad_enum, report_schema()).empty());

  Json missing = good;
  missing.erase("pass");
  CHECK_FALSE(validate_report(missing, report_schema()).empty());

  Json bad_item = good;
  bad_item["checks"][0].erase("tolerance");
  CHECK_FALSE(validate_report(bad_item, report_schema()).empty());

  Json bad_type = good;
  bad_type["pass"] = "yes";
  CHECK_FALSE(validate_report(bad_type, report_schema()).empty());

  // write_report stamps the version and enforces the schema
  std::string dir = "/tmp/mss_cli_report";
  std::filesystem::remove_all(dir);
  Json minimal = {{"scenario", "identities"}, {"pass", true}};
  write_report(dir, minimal);
  Json back = Json::parse(slurp(dir + "/report.json"));
  CHECK(back["schema_version"] == kReportSchemaVersion);
  CHECK(validate_report(back, report_schema()).empty());
  CHECK_THROWS(write_report(dir, Json{{"pass", true}}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv output is byte-deterministic") {
  std::vector<std::string> hdr = {"t", "value"};
  std::vector<std::vector<double>> rows = {{1.0, 1.0 / 3.0}, {2.5, 6.02e23}};
  write_csv("/tmp/mss_cli_a.csv", hdr, rows);
  write_csv("/tmp/mss_cli_b.csv", hdr, rows);
  CHECK(slurp("/tmp/mss_cli_a.csv") == slurp("/tmp/mss_cli_b.csv"));
  CHECK(slurp("/tmp/mss_cli_a.csv").substr(0, 8) == "t,value\n");
  CHECK_THROWS(write_csv("/tmp/mss_cli_c.csv", hdr, {{1.0}}));
  std::remove("/tmp/mss_cli_a.csv");
  std::remove("/tmp/mss_cli_b.csv");
  std::remove("/tmp/mss_cli_c.csv");
}

TEST_CASE("scenario driver: zero datum passes every scenario") {
  for (const std::string& sc : {std::string("fixed_point"), std::string("decay_suite")}) {
    std::string dir = "/tmp/mss_cli_zero_" + sc;
    std::filesystem::remove_all(dir);
    RunConfig cfg = zero_run(sc, dir);
    CHECK(run_scenario(cfg) == kExitPass);
    Json rep = Json::parse(slurp(dir + "/report.json"));
    CHECK(rep["pass"] == true);
    CHECK(rep["scenario"] == sc);
    CHECK(validate_report(rep, report_schema()).empty());

    // byte-identical on repetition
    std::string rep1 = slurp(dir + "/report.json"), csv1 = slurp(dir + "/series.csv");
    CHECK(run_scenario(cfg) == kExitPass);
    CHECK(slurp(dir + "/report.json") == rep1);
    CHECK(slurp(dir + "/series.csv") == csv1);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("scenario driver: config errors exit 2") {
  RunConfig cfg = zero_run("fixed_point", "/tmp/mss_cli_bad");
  cfg.scenario = "everything"; // bypasses build-time validation
  CHECK(run_scenario(cfg) == kExitConfig);
  std::filesystem::remove_all("/tmp/mss_cli_bad");
}
