#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geokge {

/// Input data is malformed or inconsistent (bad file, unknown name, mismatched vocab).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text file failed to parse; carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(const std::string& where, std::size_t line, const std::string& what)
      : DataError(where + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Caller violated an operation's precondition (bad ratio, k < 1, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace geokge
