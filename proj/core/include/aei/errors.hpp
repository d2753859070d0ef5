#pragma once

#include <stdexcept>
#include <string>

namespace aei {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A coefficient needs the reciprocal of a matrix function whose value at
// some eigenvalue is (numerically) zero. Happens at step-size resonances.
class NearSingularCoefficient : public Error {
 public:
  NearSingularCoefficient(const std::string& what, double magnitude)
      : Error(what), magnitude_(magnitude) {}
  double magnitude() const { return magnitude_; }

 private:
  double magnitude_;
};

// A step produced Inf or NaN.
class NonFinite : public Error {
 public:
  using Error::Error;
};

// The adaptive reference solver was asked for a step below its floor.
class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

// The assembled real matrix function carried an imaginary part, which
// means the eigendecomposition it was built from is broken.
class SpectralError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace aei
