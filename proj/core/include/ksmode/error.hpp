#pragma once

#include <stdexcept>
#include <string>

namespace ksmode {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated input contract (bad n, out-of-range alpha, invalid W, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Failure detected during a computation (divergent tail, solve defect, blowup).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ksmode
