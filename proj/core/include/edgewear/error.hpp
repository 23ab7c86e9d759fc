#pragma once

#include <stdexcept>
#include <string>

namespace edgewear {

/// Base for every error raised by the library. Callers that only care about
/// "something went wrong in edgewear" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad ranges, empty corpus, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported file / byte format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Input buffer violates a documented precondition (shape, rate, channels).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgewear
