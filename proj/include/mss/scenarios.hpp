// Scenario orchestration: run one named scenario end to end and emit
// report.json / series.csv / checkpoints into cfg.out_dir.
#pragma once

#include "mss/config.hpp"

namespace mss {

inline constexpr int kExitPass = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonContraction = 3;
inline constexpr int kExitTolerance = 4;
inline constexpr int kExitIO = 5;

// deterministic given (cfg, seed); archives the effective config alongside
// the artifacts
int run_scenario(const RunConfig& cfg);

} // namespace mss
