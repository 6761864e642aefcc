#pragma once

#include <stdexcept>
#include <string>

namespace lfa {

// Malformed or inconsistent input data: parse failures, duplicate rating
// pairs, out-of-range indices. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown during optimization: non-finite values, loss of
// positive definiteness in the damped system. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lfa
