#pragma once

namespace frameopt {

/// Exit codes of the frameopt tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitInfeasible = 3 };

/// Entry point of the frameopt tool: analyze, optimize, certify, bench, render.
int cli_main(int argc, char** argv);

}  // namespace frameopt
