// commands.hpp: subcommands of the biexsim command-line tool

#pragma once

#include <iosfwd>

#include "biexsim/config.hpp"

namespace biexsim::cli {

enum ExitCode : int { kExitOk = 0, kExitInvalidConfig = 1, kExitSolverFailure = 2 };

int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_dressed(const RunConfig& config, std::ostream& out);
int cmd_kernel_cache(const RunConfig& config, std::ostream& out);

}  // namespace biexsim::cli
