#pragma once

#include <stdexcept>
#include <string>

namespace cocite {

// Error categories map onto CLI exit codes: validation 2, data 3, degenerate 4.

/// Invalid configuration or arguments, detected before any compute.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, inconsistent or unreadable input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Statistics cannot be computed on the given data (single class, zero totals, ...).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cocite
