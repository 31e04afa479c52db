#pragma once

#include <stdexcept>
#include <string>

namespace relcur {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated precondition (bad input, unmet requirement).  CLI exit code 2.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& msg) : Error(msg) {}
};

// An iterative scheme failed to converge within its budget.  CLI exit code 3.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

// A guaranteed-solvable system failed to solve; indicates a bug.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& msg) : Error(msg) {}
};

}  // namespace relcur
