#pragma once

#include <stdexcept>
#include <string>

namespace ibreg {

/// Bad user input: malformed data, inconsistent dimensions, rank-deficient designs.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure: singular matrices, non-convergence, non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ibreg
