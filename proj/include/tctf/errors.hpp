#pragma once

#include <stdexcept>

namespace tctf {

// Bad arguments or shapes. The CLI maps this to exit code 2.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input data (CSV cells, mask files). Exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: divergence, decomposition breakdown, violated
// conjugate-symmetry invariants. Exit code 4.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tctf
