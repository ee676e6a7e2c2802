#pragma once

// Configuration-driven experiment runner behind the sgq executable.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sgq/hilbert.hpp"
#include "sgq/models.hpp"

namespace sgq::cli {

/// Bad or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3 };

struct ExperimentConfig {
  nlohmann::json raw;
  std::uint64_t seed = 12345;
  nlohmann::json system;
  nlohmann::json protocol;
  nlohmann::json scan;
  nlohmann::json duality;
  nlohmann::json ground;
  nlohmann::json output;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct SystemSpec {
  LatticeLayout layout;
  CouplingAssignment couplings;
  std::optional<double> sz;
};

/// Layout plus couplings from the "system" section.
SystemSpec build_system(const nlohmann::json& system);

struct CommandOutput {
  nlohmann::json report;
  std::string csv;  // empty when the command has no tabular output
};

CommandOutput cmd_ground(const ExperimentConfig& cfg);
CommandOutput cmd_protocol(const ExperimentConfig& cfg);
CommandOutput cmd_phase_scan(const ExperimentConfig& cfg);
CommandOutput cmd_duality_check(const ExperimentConfig& cfg);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace sgq::cli
