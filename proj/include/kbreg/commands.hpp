#pragma once

#include <optional>

#include "kbreg/config.hpp"
#include "kbreg/table.hpp"

namespace kbreg {

// One batch invocation: a command name plus the configuration and the CLI
// overrides (--data, --out, --seed, --jitter).
struct RunConfig {
  std::string command;
  Config config;
  std::string data_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> jitter;
};

struct CommandResult {
  TableOutput table;
  // extra files, written next to the main output (suffix appended to its path)
  std::vector<std::pair<std::string, TableOutput>> sidecars;
};

// Commands: fit, predict, smooth, sample, learn, relevance, kalman, compare.
CommandResult run_command(const RunConfig& rc);

}  // namespace kbreg
