#pragma once

#include <stdexcept>
#include <string>

namespace ringcirc {

/// Base exception for every failure raised by the library. `code()` is a short
/// stable identifier that the CLI copies into its machine-readable error report.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace ringcirc
