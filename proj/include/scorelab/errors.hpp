#pragma once

#include <stdexcept>
#include <string>

namespace scorelab {

/// Raised when an argument violates an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a file cannot be parsed or fails validation.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class TrainingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sign-gradient attack hit a non-finite gradient or sample.
class AttackFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scorelab
