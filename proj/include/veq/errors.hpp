#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace veq {

// Every domain error carries a stable machine-readable code next to the
// human-readable message. CLI exit codes and tests dispatch on the code.
class VeqError : public std::runtime_error {
public:
  VeqError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw VeqError(code, message);
}

}  // namespace veq
