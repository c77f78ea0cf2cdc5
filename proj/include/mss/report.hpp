// Report emission: schema-versioned report.json, byte-stable CSV series,
// and a one-screen summary table.
#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace mss {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

// the schema shipped at schema/report.schema.json, embedded for validation
const Json& report_schema();
// returns "" when valid, else a path-qualified error message
std::string validate_report(const Json& report, const Json& schema);

// stamps schema_version, validates against the shipped schema, writes
// <out_dir>/report.json with sorted keys and no volatile fields
void write_report(const std::string& out_dir, Json report);

// numeric CSV with fixed %.17g rendering (byte-identical across runs)
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void print_summary(const Json& report);

} // namespace mss
