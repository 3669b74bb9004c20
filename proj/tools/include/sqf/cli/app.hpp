#pragma once

#include <iosfwd>

namespace sqf::cli {

enum ExitCode : int {
	kOk = 0,
	kFailure = 1,
	kConfigError = 2,
	kDataError = 3,
	kNumericError = 4,
};

/// Parses arguments, runs one command and maps errors to exit codes.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace sqf::cli
