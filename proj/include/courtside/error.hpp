#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace courtside {

// Typed failure raised by parsers and solvers. `code` is a stable identifier
// (e.g. "MissingField", "TooFewKeypoints") that tests and the CLI match on.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message, std::optional<int> line = std::nullopt)
      : std::runtime_error(code + ": " + message), code_(std::move(code)), line_(line) {}

  const std::string& code() const noexcept { return code_; }
  std::optional<int> line() const noexcept { return line_; }

 private:
  std::string code_;
  std::optional<int> line_;
};

}  // namespace courtside
