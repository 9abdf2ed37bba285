#pragma once

#include <stdexcept>
#include <string>

namespace omle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, policy, or input file breaks a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An exhaustive enumeration or search would exceed its configured cap.
class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

/// A revealing (rank / singular-value) condition required by an operation does not hold.
class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

/// An experiment or learner was configured inconsistently.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace omle
