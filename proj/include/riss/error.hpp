#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riss {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (corpus lines, bracketed trees, CIP records).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at " + std::to_string(position) + ")"), position_(position) {}

  /// Line number for file readers, byte offset for string parsers.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input that violates a schema or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace riss
