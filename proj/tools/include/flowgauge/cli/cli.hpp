#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowgauge::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

/// Parses argv and runs one subcommand (audit, split, eval, tune, report).
/// Never throws; failures are reported on `err` and mapped to an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowgauge::cli
