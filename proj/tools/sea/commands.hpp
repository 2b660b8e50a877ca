#pragma once

// simulate / maxent / analyze, each taking one config file and writing its
// outputs under an output directory. Return values are process exit codes.

#include <memory>
#include <string>

#include <spdlog/logger.h>

namespace sea::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kInfeasible = 3,
  kNumericalFailure = 4,
  kMaxTimeReached = 5,
};

enum class Command { simulate, maxent, analyze };

Command parse_command(const std::string& name);

struct RunContext {
  std::string out_dir = ".";
  std::shared_ptr<spdlog::logger> log;
};

/// Never throws; failures are logged and mapped to exit codes.
int run_command(Command command, const std::string& config_path, const RunContext& ctx);

}  // namespace sea::cli
