#pragma once

#include <stdexcept>
#include <string>

namespace pggp {

/// Bad caller input: non-finite parameters, empty data, mismatched sizes.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that should be positive definite could not be factorized.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invariant violated inside the library (e.g. rejection loop runaway).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed text input. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Well-formed input whose content violates the data schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedVersion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pggp
