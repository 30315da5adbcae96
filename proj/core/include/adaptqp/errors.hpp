#pragma once

#include <stdexcept>
#include <string>

namespace adaptqp {

/// A problem instance exceeds a hard size guard (e.g. the primal QP or the
/// materialized block-diagonal system). Guards are errors, never silent
/// truncation.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, int pivot_index)
      : std::runtime_error(what), pivot_index_(pivot_index) {}
  int pivot_index() const { return pivot_index_; }

 private:
  int pivot_index_;
};

/// Training data cannot define the requested model (e.g. a single class).
class DegenerateProblemError : public std::runtime_error {
 public:
  explicit DegenerateProblemError(const std::string& what)
      : std::runtime_error(what) {}
};

/// The constraint set of a QP admits no feasible point.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Malformed input file. `line()` is 1-based, 0 when no line applies.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace adaptqp
