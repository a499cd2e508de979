#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "benjctl/app/scenario.hpp"

namespace benjctl::app {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kSuccess = 0, kValidationFailure = 2, kNumericalFailure = 3 };

/// Experiment kinds: spectrum, simulate, control, stabilize, observability, sweep.
bool is_experiment(const std::string& kind);

/// Runs one experiment and writes report.json plus its CSV/JSON data files into
/// experiment.out.  Errors propagate as ValidationError / NumericalError; the
/// report returned is the one written to disk.
nlohmann::json run_experiment(const std::string& kind, const Scenario& scenario);

/// run_experiment with error handling: failures still leave a report.json with
/// status "failed" and the diagnostic, and map to the documented exit codes.
int execute(const std::string& kind, const Scenario& scenario, std::string* diagnostic = nullptr);

std::string toolkit_version();

}  // namespace benjctl::app
