#pragma once

#include <stdexcept>
#include <string>

namespace geoagg {

// Caller passed arguments that violate a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file on disk does not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration document is malformed or inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geoagg
