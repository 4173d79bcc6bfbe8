#pragma once

#include <stdexcept>
#include <string>

namespace bjj {

/// Thrown when an iterative numeric routine produced non-finite values or
/// failed to converge. The message carries the step/refinement report.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bjj
