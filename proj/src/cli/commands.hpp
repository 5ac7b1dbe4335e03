#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace orbitinv::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerdictViolated = 2,
  kExitNoOrbit = 3,
  kExitConfigError = 4,
  kExitIntegrationFailure = 5,
};

/// Command-line values; each one set overrides the config file.
struct Options {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::string> state;
  std::optional<double> t_end;
  std::optional<double> seed_period;
  std::optional<std::size_t> resolution;
  std::optional<std::string> field_path;  // decompose
  std::string mode = "periodic";          // decompose
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "classify", "find-orbit", "verify",
                                              "scan",     "decompose", "demo"};
  return names;
}

/// Runs one subcommand and maps failures onto the exit-code contract.
/// Progress goes to `log`, diagnostics to `err`.
int run_command(const std::string& name, const Options& opt, std::ostream& log, std::ostream& err);

/// Worker count for scan: ORBITINV_WORKERS if set, else hardware concurrency.
std::size_t scan_workers();

/// Built-in configurations written by `demo`.
RunConfig demo_harmonic();
RunConfig demo_resonant();
RunConfig demo_quasi_periodic();
RunConfig demo_scan();

}  // namespace orbitinv::cli
