#pragma once

#include <ostream>

namespace mvplan {

// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInfeasible = 2,
  kExitValidation = 3,
  kExitIo = 4,
};

// Entry point behind the `mvplan` binary. Reports go to `out` (or the
// --out file); diagnostics go to `err` as "mvplan: <stage>: <file>: <reason>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mvplan
