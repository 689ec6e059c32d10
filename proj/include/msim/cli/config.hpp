#pragma once

// Run configuration for the command-line front end: a flat set of dotted keys
// read from a TOML-style file, overridden by `--set key=value`, resolved per
// subcommand.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msim/models.hpp"

namespace msim::cli {

enum class Command { rates, dynamics, spectrum, fraction, equivalence };

std::string_view command_name(Command c);

enum class SweepScale { linear, log };

struct SweepSpec {
  std::optional<double> min;
  std::optional<double> max;
  std::optional<std::size_t> points;
  std::optional<SweepScale> scale;
};

struct ResolvedSweep {
  double min = 0.0;
  double max = 0.0;
  std::size_t points = 0;
  SweepScale scale = SweepScale::linear;
  std::vector<double> values() const;
};

struct RunConfig {
  PhysicalConfig physical;
  ModelKind model = ModelKind::cavity;
  bool selection_rules = true;
  std::optional<double> t_max_ps;  ///< default 10 / gamma of the model
  std::size_t steps = 1000;
  InitialState initial = InitialState::ground;
  SweepSpec sweep;
  double spectrum_omega_max = 0.1;
  std::size_t spectrum_max_rows = 4001;
  std::string output;  ///< empty means stdout
  std::size_t threads = 0;  ///< 0: MIRROR_SIM_THREADS, then the hardware count

  /// Sweep bounds with the defaults of the given subcommand filled in; validated.
  ResolvedSweep resolved_sweep(Command c) const;
  void validate() const;
};

/// Key-value pairs in file order; later entries for the same key win.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses `key = value` lines, `[section]` headers (prefixing later keys with
/// "section."), `#` comments and double-quoted strings. Throws InvalidArgument
/// with the line number on malformed input.
KeyValues parse_config_text(const std::string& text, const std::string& source = "<config>");
KeyValues read_config_file(const std::string& path);

/// Splits "key=value".
std::pair<std::string, std::string> parse_assignment(const std::string& s);

/// Applies one key. Unknown keys and unparsable values throw InvalidArgument.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);
void apply_all(RunConfig& cfg, const KeyValues& kv);

/// Every key with its resolved value, in a fixed order; `cmd` fills in the
/// sweep defaults of that subcommand.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg, std::optional<Command> cmd);

/// Number of workers: cfg.threads, else MIRROR_SIM_THREADS, else hardware concurrency.
std::size_t resolve_threads(const RunConfig& cfg);

/// A double with 17 significant digits, as written in CSV files.
std::string format_number(double v);

}  // namespace msim::cli
