#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dac {

enum class ErrorCode {
  no_such_agent,
  invalid_command,
  incomplete_command_set,
  dimension_mismatch,
  invalid_index,
  no_goals_available,
  agent_dead,
  agent_alive,
  config,
  io,
  snapshot,
};

std::string_view to_string(ErrorCode code);

/// All recoverable failures raised by the library carry one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dac
