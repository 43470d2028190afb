#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace statphase::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kHypothesis = 2, kFailure = 3 };

struct RunContext {
  ExperimentConfig config;
  std::filesystem::path out;
  int threads = 1;
  bool force = false;
  std::optional<double> lambda;  ///< evaluate: single lambda instead of the grid
  std::ostream* log = nullptr;   ///< one-line summaries; null for silence
};

int cmd_audit(const RunContext& ctx);
int cmd_evaluate(const RunContext& ctx);
int cmd_sweep(const RunContext& ctx);
int cmd_dispersive(const RunContext& ctx);
int cmd_rescale_check(const RunContext& ctx);
int cmd_verify_lemmas(const RunContext& ctx);

/// Dispatch by command name; unknown names throw ConfigError.
int run_command(const std::string& name, const RunContext& ctx);

}  // namespace statphase::cli
