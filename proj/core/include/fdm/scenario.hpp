#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fdm/config.hpp"

namespace fdm {

struct ScenarioResult {
    int exit_code = 0;
    std::filesystem::path output_dir;
    std::string summary;
};

/// Runs one configured scenario to completion: snapshots at the configured
/// cadence, a CSV time series, rendered ||alpha|| maps and a final summary
/// with invariant-check results. Solver aborts dump diagnostics and return a
/// nonzero exit code.
ScenarioResult run_scenario(const RunConfig& config, std::ostream& log);

}  // namespace fdm
