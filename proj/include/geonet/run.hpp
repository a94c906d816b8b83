#pragma once

#include <iosfwd>
#include <string>

#include "geonet/config.hpp"

namespace geonet {

inline constexpr const char* kToolName = "geonet";
inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command surface: 0 success (at least one converged,
/// verified network for the solve commands), 1 solver failure, 2 config or
/// usage error.
enum ExitCode { kExitOk = 0, kExitSolverFailure = 1, kExitConfigError = 2 };

/// Execute the configured pipeline and persist report.json (and the polyline
/// CSV when configured) under outDir.
int runSolve(const RunConfig& cfg, const std::string& outDir, std::ostream& log);

/// Re-build the networks stored in outDir/report.json and re-verify them at
/// the configured tolerance.
int runVerify(const RunConfig& cfg, const std::string& outDir, std::ostream& log);

/// Export edge polylines of outDir/report.json to the configured CSV.
int runExport(const RunConfig& cfg, const std::string& outDir, std::ostream& log);

/// The standard-metric oracle battery for the configured dimension (both
/// spaces); prints a pass/fail table.
int runOracleCheck(const RunConfig& cfg, std::ostream& log);

}  // namespace geonet
