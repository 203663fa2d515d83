#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace circuitq {

/// Base class of every error raised by the library. `code()` is a stable
/// machine-readable token used by the CLI and the HTTP service.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& msg)
      : Error("parse_error", "line " + std::to_string(line) + ", column " +
                                 std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Invalid circuit topology or component values.
class CircuitError : public Error {
 public:
  using Error::Error;
};

/// Missing or extraneous parameter bindings.
class BindingError : public Error {
 public:
  using Error::Error;
};

/// Numerical or symbolic failure during analysis.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace circuitq
