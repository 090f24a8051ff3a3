#pragma once

#include <stdexcept>
#include <string>

namespace rmt {

// Base of every error raised by the library. The CLI maps these to exit
// codes: UsageError -> 2, everything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Quadrature did not reach the requested tolerance; carries what it got.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace rmt
