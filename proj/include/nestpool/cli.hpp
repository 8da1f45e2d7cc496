#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nestpool/strategy.hpp"

namespace nestpool {

/// Exit statuses of the command-line tool.
enum ExitStatus : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_uncertified = 3,
    exit_violation = 4,
};

/// Runs one command. args excludes the program name. Data goes to out,
/// diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Indented listing of pool labels (1), (1,i2), ... with sizes, at most
/// max_nodes lines followed by an elision marker.
std::string render_tree(const NestedStrategy& s, int max_nodes = 64);

} // namespace nestpool
