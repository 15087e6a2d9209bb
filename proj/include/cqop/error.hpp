#pragma once

#include <stdexcept>
#include <string>

namespace cqop {

enum class ErrorCode {
  invalid_argument,
  parse,
  domain,
  unsupported,
  grid_mismatch,
  numeric,
  io,
};

/// Library error. Expression failures use ExprError instead.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace cqop
