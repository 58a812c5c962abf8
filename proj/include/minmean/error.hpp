#pragma once

#include <stdexcept>
#include <string>

namespace minmean {

// Argument lies outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An object is not in a state where the operation is defined (e.g. improper posterior).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The minimum mean sits exactly on the threshold; no test can terminate.
class DegenerateInstanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace minmean
