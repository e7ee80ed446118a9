#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace capoint {

// Invalid input: bad expression text, out-of-range parameters, malformed files.
// CLI maps this to exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure exhausted its budget without converging.
// CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error while parsing expression text; keeps the byte offset.
struct ParseError : ValidationError {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : ValidationError("syntax error at offset " + std::to_string(off) + ": " + msg),
        offset(off) {}
};

// Evaluation left an operation's domain (ln of nonpositive, division by zero, ...).
struct DomainError : ValidationError {
  using ValidationError::ValidationError;
};

}  // namespace capoint
