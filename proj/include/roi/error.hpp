#pragma once

#include <stdexcept>
#include <string>

namespace roi {

/// Bad or missing input data (unreadable image, mismatched mask, empty dataset).
/// The CLI maps it to exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or option combinations. The CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace roi
