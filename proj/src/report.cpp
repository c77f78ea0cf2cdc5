#include "mss/report.hpp"

#include "mss/util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mss {

namespace {

// kept in sync with schema/report.schema.json (the shipped copy is the
// documentation; this is the enforced one)
const char* kSchemaText = R"JSON(
{
  "type": "object",
  "required": ["schema_version", "scenario", "pass"],
  "properties": {
    "schema_version": {"type": "integer"},
    "scenario": {
      "type": "string",
      "enum": ["identities", "fixed_point", "decay_suite", "finite_t0_crosscheck", "energy_drift"]
    },
    "pass": {"type": "boolean"},
    "config": {"type": "object"},
    "grid": {
      "type": "object",
      "required": ["n", "L"],
      "properties": {"n": {"type": "integer"}, "L": {"type": "number"}}
    },
    "checks": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["name", "value", "tolerance", "pass"],
        "properties": {
          "name": {"type": "string"},
          "value": {"type": "number"},
          "tolerance": {"type": "number"},
          "pass": {"type": "boolean"}
        }
      }
    },
    "iterations": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["iterate", "distance"],
        "properties": {
          "iterate": {"type": "integer"},
          "Y": {"type": "number"},
          "Y1": {"type": "number"},
          "Z0": {"type": "number"},
          "Z1": {"type": "number"},
          "Z2": {"type": "number"},
          "N": {"type": "number"},
          "distance": {"type": "number"},
          "contraction_ratio": {"type": "number"}
        }
      }
    },
    "fits": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["series", "zero_series"],
        "properties": {
          "series": {"type": "string"},
          "exponent": {"type": "number"},
          "log_power": {"type": "integer"},
          "r_squared": {"type": "number"},
          "t_lo": {"type": "number"},
          "t_hi": {"type": "number"},
          "expected": {"type": "number"},
          "zero_series": {"type": "boolean"}
        }
      }
    },
    "residuals": {
      "type": "object",
      "properties": {
        "schrodinger": {"type": "number"},
        "maxwell": {"type": "number"},
        "trajectory_q": {"type": "number"},
        "trajectory_sigma": {"type": "number"}
      }
    },
    "energy": {
      "type": "object",
      "properties": {
        "reference": {"type": "number"},
        "max_drift": {"type": "number"},
        "drift_per_decade": {"type": "number"},
        "budget": {"type": "number"}
      }
    },
    "invariants": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["name", "value", "tolerance", "pass"],
        "properties": {
          "name": {"type": "string"},
          "value": {"type": "number"},
          "tolerance": {"type": "number"},
          "pass": {"type": "boolean"}
        }
      }
    },
    "crosscheck": {"type": "object"},
    "notes": {"type": "array", "items": {"type": "string"}}
  }
}
)JSON";

bool type_matches(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  return false;
}

std::string validate_node(const Json& v, const Json& schema, const std::string& path) {
  if (schema.contains("type")) {
    std::string t = schema["type"].get<std::string>();
    if (!type_matches(v, t)) return path + ": expected " + t;
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"])
      if (e == v) ok = true;
    if (!ok) return path + ": value not in enum";
  }
  if (schema.contains("required")) {
    for (const auto& r : schema["required"])
      if (!v.contains(r.get<std::string>()))
        return path + ": missing required '" + r.get<std::string>() + "'";
  }
  if (schema.contains("properties") && v.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (!v.contains(key)) continue;
      std::string err = validate_node(v[key], sub, path + "." + key);
      if (!err.empty()) return err;
    }
  }
  if (schema.contains("items") && v.is_array()) {
    std::size_t i = 0;
    for (const auto& el : v) {
      std::string err = validate_node(el, schema["items"], path + "[" + std::to_string(i) + "]");
      if (!err.empty()) return err;
      ++i;
    }
  }
  return "";
}

} // namespace

const Json& report_schema() {
  static const Json schema = Json::parse(kSchemaText);
  return schema;
}

std::string validate_report(const Json& report, const Json& schema) {
  return validate_node(report, schema, "report");
}

void write_report(const std::string& out_dir, Json report) {
  report["schema_version"] = kReportSchemaVersion;
  std::string err = validate_report(report, report_schema());
  if (!err.empty()) throw std::runtime_error("report schema violation: " + err);
  std::filesystem::create_directories(out_dir);
  std::ofstream f(out_dir + "/report.json");
  if (!f) throw std::runtime_error("cannot write " + out_dir + "/report.json");
  f << report.dump(2) << "\n"; // nlohmann objects are key-sorted: stable bytes
  if (!f) throw std::runtime_error("write failed for " + out_dir + "/report.json");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    f << (i ? "," : "") << header[i];
  f << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::runtime_error("csv row width mismatch in " + path);
    for (std::size_t i = 0; i < row.size(); ++i)
      f << (i ? "," : "") << fmt_g17(row[i]);
    f << "\n";
  }
  if (!f) throw std::runtime_error("write failed for " + path);
}

void print_summary(const Json& report) {
  std::printf("scenario: %s  =>  %s\n", report.value("scenario", std::string("?")).c_str(),
              report.value("pass", false) ? "PASS" : "FAIL");
  if (report.contains("checks")) {
    for (const auto& c : report["checks"])
      std::printf("  check %-24s value %.3e  tol %.1e  %s\n",
                  c["name"].get<std::string>().c_str(), c["value"].get<double>(),
                  c["tolerance"].get<double>(), c["pass"].get<bool>() ? "ok" : "FAIL");
  }
  if (report.contains("iterations")) {
    const auto& its = report["iterations"];
    if (!its.empty()) {
      const auto& last = its.back();
      std::printf("  iterations %zu  final distance %.3e  ratio %.3f\n", its.size(),
                  last["distance"].get<double>(), last.value("contraction_ratio", 0.0));
    }
  }
  if (report.contains("fits")) {
    for (const auto& fjson : report["fits"]) {
      if (fjson["zero_series"].get<bool>()) {
        std::printf("  fit   %-24s zero series\n", fjson["series"].get<std::string>().c_str());
      } else {
        std::printf("  fit   %-24s slope %+.3f (expected %+.2f, logs^%d)  r2 %.4f\n",
                    fjson["series"].get<std::string>().c_str(), fjson["exponent"].get<double>(),
                    fjson["expected"].get<double>(), fjson["log_power"].get<int>(),
                    fjson["r_squared"].get<double>());
      }
    }
  }
  if (report.contains("residuals")) {
    std::printf("  residuals:");
    for (const auto& [key, val] : report["residuals"].items())
      std::printf("  %s %.3e", key.c_str(), val.get<double>());
    std::printf("\n");
  }
  if (report.contains("energy")) {
    const auto& e = report["energy"];
    std::printf("  energy: reference %.6e  drift/decade %.3e (budget %.3e)\n",
                e.value("reference", 0.0), e.value("drift_per_decade", 0.0),
                e.value("budget", 0.0));
  }
  if (report.contains("invariants")) {
    for (const auto& c : report["invariants"])
      std::printf("  inv   %-24s value %.3e  tol %.1e  %s\n",
                  c["name"].get<std::string>().c_str(), c["value"].get<double>(),
                  c["tolerance"].get<double>(), c["pass"].get<bool>() ? "ok" : "FAIL");
  }
}

} // namespace mss
