#pragma once

#include <stdexcept>
#include <string>

namespace igmrf {

// Invalid input or configuration: a precondition was violated before any
// numerical work started. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation could not be completed (singular retained eigenvalue,
// undefined quantile, failed solve). The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace igmrf
