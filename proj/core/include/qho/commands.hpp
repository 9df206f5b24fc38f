#pragma once

#include "qho/artifacts.hpp"
#include "qho/config.hpp"

namespace qho {

// Exit-status contract shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitViolation = 3;

struct TauGrid {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;  // 0 = derive from the config horizon
};

/// Parses "a:b:n".
TauGrid parse_tau_grid(const std::string& text);

struct CommandResult {
  int status = kExitOk;
  std::string message;
};

CommandResult cmd_moments(const ProblemConfig& config, const TauGrid& grid,
                          const std::filesystem::path& out_dir);

CommandResult cmd_backaction(const ProblemConfig& config, double mu_max, int steps,
                             const std::filesystem::path& out_dir);

CommandResult cmd_synthesize(const ProblemConfig& config, double mu_max, int steps,
                             const std::filesystem::path& out_dir);

CommandResult cmd_check(const ProblemConfig& config,
                        const std::filesystem::path& out_dir);

}  // namespace qho
