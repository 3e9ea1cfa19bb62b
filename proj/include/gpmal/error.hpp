#pragma once

#include <stdexcept>
#include <string>

namespace gpmal {

/// Malformed or unusable input data (CSV content, shapes that disagree).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A formula evaluated outside the region where it is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace gpmal
