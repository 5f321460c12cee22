#pragma once

#include <stdexcept>

namespace surgeflow {

// Bad input data or configuration; the CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace surgeflow
