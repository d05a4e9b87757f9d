#pragma once

#include <stdexcept>
#include <string>

namespace avstl {

/// Formula text could not be parsed. Carries 1-based line/column of the
/// offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, int line, int column)
      : std::runtime_error(std::move(msg)), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Evaluation cannot proceed (mixed finite/infinite integration window,
/// malformed intermediate signal, non-finite model state, ...).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Formula is outside the supported fragment (nested averaged operators).
class UnsupportedFormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An atom references a variable the trace does not carry.
class UnknownVariableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reference evaluator failed to converge or hit an internal limit.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace avstl
