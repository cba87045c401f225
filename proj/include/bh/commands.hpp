#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bh/experiment.hpp"

namespace bh {

enum class Command { forward, dtn, cgo, reconstruct, carleman, uc, sweep };

struct CommandOptions {
  std::string out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 1;
};

struct CommandReport {
  std::string summary;
  std::vector<std::string> files;
  std::size_t aborted = 0;
};

// Output files are prefixed with the scenario name.
CommandReport run_command(Command cmd, const Scenario& sc, const CommandOptions& opt);

// Fits err against delta from a records CSV written by the sweep command.
CommandReport run_fit(const std::string& records_path, FitModel model, FitTarget target, const CommandOptions& opt);

std::vector<StabilityRecord> parse_records_csv(const std::string& text);

bool parse_command(const std::string& name, Command& out);

} // namespace bh
