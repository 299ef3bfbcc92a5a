#pragma once

#include <stdexcept>
#include <string>

namespace tracematch {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (granularities, grids, CLI options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data (files, records, corpora).
class DataError : public Error {
 public:
  using Error::Error;
};

// An internal consistency check failed; indicates a bug.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace tracematch
