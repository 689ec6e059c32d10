// mirror_sim: driven quantum-dot emitter in front of a mirror.
//
//   mirror_sim [--config FILE] [--set key=value]... [-o FILE] [--threads N] <command>
//   commands: rates dynamics spectrum fraction equivalence
//
// `--print-config` prints every key with its resolved value and exits.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msim/cli/commands.hpp"
#include "msim/errors.hpp"

using namespace msim;
using namespace msim::cli;

int main(int argc, char** argv) {
  CLI::App app{"Driven quantum-dot emitter near a perfect mirror"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::string> output;
  std::optional<std::size_t> threads;
  bool print_config = false;
  app.add_option("--config,-c", config_path, "TOML-style config file")->check(CLI::ExistingFile);
  app.add_option("--set,-s", overrides, "override one key, e.g. --set geometry.r_d_nm=200")->take_all();
  app.add_option("--output,-o", output, "CSV output path (default stdout)");
  app.add_option("--threads,-j", threads, "worker threads (default MIRROR_SIM_THREADS or hardware count)");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");

  const std::pair<const char*, Command> commands[] = {
      {"rates", Command::rates},           {"dynamics", Command::dynamics},
      {"spectrum", Command::spectrum},     {"fraction", Command::fraction},
      {"equivalence", Command::equivalence}};
  const char* help[] = {"surface-modified rate and shift vs distance", "populations and coherences over time",
                        "resonance-fluorescence spectra, mirror and free space", "coherent fraction vs drive",
                        "compare the cavity and image models"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) subs.push_back(app.add_subcommand(commands[i].first, help[i]));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  std::optional<Command> command;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) command = commands[i].second;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_all(cfg, read_config_file(config_path));
    for (const auto& s : overrides) {
      const auto [key, value] = parse_assignment(s);
      apply_key(cfg, key, value);
    }
    if (output) cfg.output = *output;
    if (threads) cfg.threads = *threads;

    if (print_config) {
      for (const auto& [key, value] : describe(cfg, command)) std::cout << key << " = " << value << '\n';
      return kExitOk;
    }
    if (!command) {
      std::cerr << app.help();
      return kExitUsage;
    }

    const CommandResult result = run_command(*command, cfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    write_output(cfg.output, to_csv(result.document));
    if (result.exit_code == kExitEquivalence) {
      for (const auto& line : result.document.footer) std::cerr << line << '\n';
    }
    return result.exit_code;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LeakageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEquivalence;
  } catch (const NonConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const InvariantViolation& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNonConvergence;
  }
}
