#pragma once

#include <iosfwd>

#include "finer/config.hpp"

namespace finer {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,      ///< bad flags or configuration
  kExitIo = 3,         ///< unreadable input, unwritable or existing output
  kExitNumerical = 4,  ///< non-finite values or eigen-solver failure
  kExitInternal = 5,   ///< any other failure
};

/// Runs one experiment, writing artifacts under config.run_directory() and
/// appending a row per metric to `<out>/metrics.csv`. Progress goes to `log`,
/// diagnostics to `err`. Never throws.
int run(const ExperimentConfig& config, std::ostream& log, std::ostream& err);

}  // namespace finer
