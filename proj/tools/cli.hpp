#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lgi/sweep.hpp"

namespace lgi::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kVerificationFailed = 2 };

/// Runs one command line (args exclude the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `sweep` arguments (flags and/or --config FILE) into a spec without running it.
SweepSpec parse_sweep_spec(const std::vector<std::string>& args);

}  // namespace lgi::cli
