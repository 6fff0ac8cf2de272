#pragma once

namespace oblab {

/// Command-line entry point. Subcommands: solve, analyze, experiment, vmo,
/// blowup; shared flags --config <path> (required), --out <dir>,
/// --threads <n>, --seedless.
///
/// Exit codes: 0 when every assertion passes, 1 on assertion or pipeline
/// failure (the failing report path is printed), 2 on a malformed config or
/// invocation (with a line/field diagnostic).
int run_cli(int argc, const char* const* argv);

}  // namespace oblab
