#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pipesizer {

// Base of every error raised by the library. Each subclass maps to a distinct
// CLI exit code (see tools/cli.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  enum class Kind {
    kSyntax,
    kBadNumber,
    kUnknownNode,
    kUnknownPipe,
    kDuplicateId,
    kMissingDesign,
    kUnsupported,
  };

  ParseError(Kind kind, std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  // 1-based; 0 when the error is not tied to a line (e.g. a missing section).
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

// Network or design violates a structural invariant (bad topology, a junction
// cut off from every reservoir, dimension mismatch, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double last_residual)
      : Error(message), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

// Raised when not even the all-maximum design meets the head constraints.
class InfeasibleNetworkError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace pipesizer
