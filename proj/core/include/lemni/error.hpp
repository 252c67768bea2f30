#pragma once

#include <stdexcept>
#include <string>

namespace lemni {

/// Thrown when an iterative routine fails to converge (root solve,
/// continuation, quadrature panel budget). The message names the stage
/// and the parameter location where it happened.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lemni
