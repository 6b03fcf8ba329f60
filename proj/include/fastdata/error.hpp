#pragma once

#include <stdexcept>
#include <string>

namespace fastdata {

// Root of every exception the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad query configuration: unknown names, out-of-range parameters,
// missing columns. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unusable input data. The CLI maps this to exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// A model could not be fitted (too few points, singular scatter, ...).
class DegenerateError : public DataError {
 public:
  using DataError::DataError;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

// A run stopped because its owner asked it to.
class Cancelled : public Error {
 public:
  using Error::Error;
};

}  // namespace fastdata
