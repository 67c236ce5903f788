#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace projgnep {

/// Malformed or out-of-contract input (dimension mismatch, bad budget, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine hit its iteration cap; carries the last iterate.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd last_iterate)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}

  const Eigen::VectorXd& last_iterate() const { return last_iterate_; }

 private:
  Eigen::VectorXd last_iterate_;
};

/// Problem-file grammar error with 1-based line/column.
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, int line, int column)
      : InputError("line " + std::to_string(line) + ", column " +
                   std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// A load-time hypothesis check failed at a concrete probe point.
class HypothesisError : public InputError {
 public:
  HypothesisError(const std::string& what, Eigen::VectorXd witness)
      : InputError(what), witness_(std::move(witness)) {}

  const Eigen::VectorXd& witness() const { return witness_; }

 private:
  Eigen::VectorXd witness_;
};

}  // namespace projgnep
