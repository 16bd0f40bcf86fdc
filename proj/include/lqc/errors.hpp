#pragma once

#include <stdexcept>
#include <string>

namespace lqc {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed caller input: dimension mismatch, asymmetric or indefinite
// cost matrices, out-of-range parameters.
class BadInput : public Error {
 public:
  using Error::Error;
};

// An iterative solve ran out of iterations before meeting its tolerance.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

// A Riccati solution was produced but the resulting closed loop is not
// asymptotically stable, so no stabilizing solution exists for the input.
class NotStabilizable : public Error {
 public:
  using Error::Error;
};

// An eigenvalue or factorization routine failed to converge internally.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// An instance whose optimal cost is zero; competitive ratios are undefined.
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

// A rollout produced a non-finite state. Carries the first bad step.
class Diverged : public Error {
 public:
  Diverged(int step, const std::string& what) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// A controller tried to read a true disturbance it has not observed yet.
class CausalityViolation : public Error {
 public:
  using Error::Error;
};

// File-level ingestion failures.
class MissingFile : public Error {
 public:
  using Error::Error;
};

// Structural problem in an input file. Rows are 1-based and include the
// header, so the first data row is row 2.
class ParseError : public Error {
 public:
  ParseError(int row, int column, const std::string& what)
      : Error(what), row_(row), column_(column) {}
  int row() const { return row_; }
  int column() const { return column_; }

 private:
  int row_;
  int column_;
};

// A well-formed record that violates a domain rule (e.g. non-positive
// energy demand). Rows are 1-based including the header.
class ValidationError : public Error {
 public:
  ValidationError(int row, const std::string& what) : Error(what), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

// Bad experiment configuration (schema or semantic).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lqc
