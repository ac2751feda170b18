#pragma once

#include <stdexcept>
#include <string>

namespace fusetrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Innovation or track covariance is not positive definite.
class SingularInnovationError : public Error {
 public:
  using Error::Error;
};

class StaleFrameError : public Error {
 public:
  using Error::Error;
};

class UndefinedMseError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSONL record or unreadable log file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace fusetrack
