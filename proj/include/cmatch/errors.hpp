#pragma once

#include <stdexcept>
#include <string>

namespace cmatch {

/// A caller-supplied parameter is outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A hard size cap (edges, vertices, bitmask width) was exceeded.
class CapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// The estimated work or memory exceeds the configured ceiling.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal consistency check failed.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cmatch
