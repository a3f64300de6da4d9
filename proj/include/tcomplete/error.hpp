#pragma once

#include <stdexcept>
#include <string>

namespace tcomplete {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands whose shapes are incompatible.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range or otherwise invalid scalar parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, failed factorizations, broken symmetry.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Unreadable/unwritable files and malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tcomplete
