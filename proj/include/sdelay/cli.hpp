#pragma once

namespace sdelay::cli {

/// Subcommands validate, kernels, simulate, montecarlo, replay.
/// Exit status: 0 success, 1 numerical or validation failure, 2 usage error.
int dispatch(int argc, char** argv);

}  // namespace sdelay::cli
