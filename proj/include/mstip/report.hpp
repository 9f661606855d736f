#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "mstip/scenario.hpp"

namespace mstip {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
  std::optional<double> h_override;
  std::uint64_t seed = 1;
};

struct RunResult {
  nlohmann::ordered_json report;
  int exit_code = 0;          // 0 ok, 3 analysis error, 4 numerical error
  std::string failed_block;   // first block that failed, empty when none
  std::string message;
};

// Builds the grid, solves once and runs every enabled analysis. A failing
// analysis becomes {"error": {...}} in its block; the run continues.
RunResult run_scenario(Scenario s, const RunOptions& opts = {});

// Report with the timing metadata removed (for reproducibility checks).
nlohmann::ordered_json strip_timings(nlohmann::ordered_json report);

// CSV with a header row. Kinds: growth, phi, ahlfors, chain. Throws
// ConfigError for an unknown kind and DomainError if the block is missing.
std::string emit_plotdata(const nlohmann::ordered_json& report, const std::string& kind);

// 2 for ConfigError, 4 for NumericalError, 3 for any other library error.
int exit_code_for(const std::exception& e);
const char* error_kind(const std::exception& e);

}  // namespace mstip
