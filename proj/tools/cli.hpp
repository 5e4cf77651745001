#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cglab::cli {

enum ExitCode : int { ok = 0, failure = 1, usage = 2 };

/// Runs one experiment. Exit 2 for usage and configuration errors (unknown
/// keys are named), 1 when the pipeline itself fails.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cglab::cli
