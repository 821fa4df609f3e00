#pragma once

namespace rrsens::cli {

/// Entry point behind the `rrsens` binary: subcommands analyze, simulate,
/// oracle. Returns the process exit code (0 only when every requested output
/// was written and no error-level finding occurred).
int run(int argc, const char* const* argv);

}  // namespace rrsens::cli
