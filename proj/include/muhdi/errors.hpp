#pragma once

#include <stdexcept>
#include <string>

namespace muhdi {

// Bad input values or malformed configuration. Maps to CLI exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: a call that the current object state cannot honor.
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Data access outside the sequential training protocol. Maps to exit code 3.
struct ProtocolViolation : std::runtime_error {
  explicit ProtocolViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value reached a loss or parameter update. Maps to exit code 4.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace muhdi
