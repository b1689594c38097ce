#pragma once

// batchps command-line front end. Each command returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "batchps/errors.hpp"
#include "batchps/model.hpp"

namespace batchps::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailed = 1,
  kConfigError = 2,
  kTruncationFailure = 3,
  kSimulationGuard = 4,
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::optional<double> rho;
  std::optional<double> rho_star;
  std::optional<double> q;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> replications;
  std::filesystem::path out = ".";
  bool out_given = false;
  std::map<std::string, double> tolerances;

  // pmf
  std::optional<std::size_t> m_max;
  std::optional<std::size_t> j_max;
  std::uint64_t cond_b = 2;
  std::uint64_t cond_m = 10;
  // simulate
  std::string mode = "regenerative";
  std::uint64_t warmup = 1000;
  std::uint64_t stride = 1;
  std::uint64_t event_cap = 1'000'000'000;
  // figures
  std::string hq_source = "analytic";
  std::string profile = "fast";
  // validate
  bool inject_fault = false;

  /// Exactly one of rho / rho_star must be set; throws ConfigError otherwise
  /// and ParameterError for an invalid pair.
  ModelParams params() const;
  std::uint64_t replications_or(std::uint64_t fallback) const { return replications.value_or(fallback); }
};

/// Reads a JSON config document into cfg (fields present in the file only).
void load_config_file(const std::filesystem::path& file, ExperimentConfig& cfg);

/// Parses NAME=VALUE.
std::pair<std::string, double> parse_tolerance(const std::string& spec);

int cmd_constants(const ExperimentConfig& cfg);
int cmd_pmf(const ExperimentConfig& cfg);
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_figures(const ExperimentConfig& cfg);
int cmd_validate(const ExperimentConfig& cfg);

/// Full entry point: argument parsing, dispatch, exception to exit-code mapping.
int run(int argc, char** argv);

}  // namespace batchps::cli
