#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ringcirc::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;  // a check ran and reported a failure
inline constexpr int kError = 2;        // usage or module error; JSON on `err`

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ringcirc::cli
