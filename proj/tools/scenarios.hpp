#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "krein/types.hpp"

namespace kreintool {

struct RunConfig {
  std::string scenario;
  std::map<std::string, std::string> parameters;  ///< validated per scenario; unknown keys rejected
  std::filesystem::path output_dir;
  long seed = 0;  ///< drives the randomized demo scenarios only
};

std::vector<std::string> scenario_names();

/// One usage block per scenario: allowed parameters with their defaults.
std::string scenario_help();

/// Tolerance knobs with KREINTOOL_TOL_* environment overrides applied
/// (e.g. KREINTOOL_TOL_RESID=1e-9).
krein::Tolerances tolerances_from_env();

/// Runs one scenario to completion, writes its artifacts plus a trailing
/// manifest.json into config.output_dir, and returns the artifact file names.
/// Throws krein::Error subclasses on invalid config or solver failure;
/// nothing is written after the first error.
std::vector<std::string> run(const RunConfig& config);

}  // namespace kreintool
