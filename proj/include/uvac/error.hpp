#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uvac {

// Input violates a documented precondition. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class WindowTooNarrow : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GainTooLarge : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonUniformGrid : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A numerical procedure could not deliver its result. Maps to exit code 4.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoPeak : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FlankNotBracketed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateData : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// File could not be opened, read or written. Maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uvac
