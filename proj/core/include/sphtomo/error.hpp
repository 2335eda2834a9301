#pragma once

#include <stdexcept>
#include <string>

namespace sphtomo {

/// Thrown when an argument violates a mathematical precondition
/// (invalid spin labels, k out of range, |x| > 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown for malformed user input: files, configuration, record sets.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure fails to produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, written or renamed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sphtomo
