#pragma once

#include <string>
#include <vector>

#include "msim/cli/config.hpp"
#include "msim/cli/csv.hpp"

namespace msim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNonConvergence = 2;
inline constexpr int kExitEquivalence = 3;

/// Equivalence passes when the deviation and the leakage stay below these.
inline constexpr double kEquivalenceDeviation = 1e-6;
inline constexpr double kEquivalenceLeakage = 1e-10;

struct CommandResult {
  CsvDocument document;
  int exit_code = kExitOk;
  std::vector<std::string> warnings;  ///< for stderr; not part of the CSV
};

CommandResult cmd_rates(const RunConfig& cfg);
CommandResult cmd_dynamics(const RunConfig& cfg);
CommandResult cmd_spectrum(const RunConfig& cfg);
CommandResult cmd_fraction(const RunConfig& cfg);
CommandResult cmd_equivalence(const RunConfig& cfg);

/// Validates the config and dispatches.
CommandResult run_command(Command c, const RunConfig& cfg);

/// The resolved configuration as `# key = value` lines heading every CSV.
std::vector<std::string> config_header(Command c, const RunConfig& cfg);

}  // namespace msim::cli
