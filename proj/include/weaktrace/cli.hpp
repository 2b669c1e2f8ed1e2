#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace weaktrace::cli {

inline constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 success, 1 internal error, 2 invalid configuration,
// 3 no postselected events.
enum ExitCode : int { kOk = 0, kInternal = 1, kInvalidConfig = 2, kNoEvents = 3 };

// args excludes the program name. Tables go to `out` (or the --out file),
// diagnostics to `err` as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weaktrace::cli
