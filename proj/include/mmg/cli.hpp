#pragma once

#include <iosfwd>

namespace mmg {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_config = 2, exit_runtime = 3 };

/// Entry point of the `mmg` tool. Data go to files or `out`, diagnostics to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmg
