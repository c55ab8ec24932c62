#pragma once

#include <stdexcept>
#include <string>

namespace ccbfair {

// Bad input, schema violation, missing file or invalid option.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite parameters, losses or rewards.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccbfair
