#pragma once

#include <string>
#include <vector>

#include "hypflow/config.hpp"
#include "hypflow/records.hpp"

namespace hypflow {

// Runner exit codes, also used by the CLI process.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitUndecidedBreach = 3;
inline constexpr int kExitMixedVersions = 4;

std::vector<std::string> list_experiments();

// Executes the configured experiment and returns the record (not yet
// persisted). Throws ConfigError for unknown experiments or bad params.
ResultRecord run_experiment(const Config& config);

// Full run: execute, append the record under the output directory, and
// translate undecided-rate breaches into the exit code.
int run_and_persist(const Config& config, std::string* record_path = nullptr);

}  // namespace hypflow
