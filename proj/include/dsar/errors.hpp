#pragma once

#include <stdexcept>

namespace dsar {

/// Argument outside the domain of an operation (e.g. slow time outside the pass).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Zero range between antenna and point.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A searched-for quantity does not exist (no root, no peak).
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (non-unit vector, mismatched grids).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration value.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dsar
