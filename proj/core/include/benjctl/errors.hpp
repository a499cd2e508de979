#pragma once

#include <stdexcept>
#include <string>

namespace benjctl {

/// Invalid input: bad parameters, malformed data, violated preconditions.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation could not be completed to the required accuracy
/// (singular Gram matrix, failed observability, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace benjctl
