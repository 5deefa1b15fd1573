#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nldof/conditions.hpp"
#include "nldof/experiment.hpp"

namespace nldof::cli {

inline constexpr const char* kConfigVersion = "nldof-config-v1";

/// Exit codes shared by every subcommand.
enum ExitCode : int { kSuccess = 0, kAnalysisNegative = 1, kUsageError = 2 };

/// Loads a "nldof-config-v1" JSON document. A relative "a_file" is resolved against
/// the directory holding the config file. Throws InvalidInput on any schema problem.
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ConditionsReport& report);
nlohmann::json to_json(const DofResult& dof, const ChannelDims& dims);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Parses `args` (without the program name) and runs one subcommand:
/// dof, check-a, simulate or sweep-snr. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nldof::cli
