#pragma once

#include <stdexcept>
#include <string>

namespace frugal {

// Base for every error raised by the library. The CLI maps each subclass to
// a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: CSV cells, model text, JSON documents, missing files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but violates an operation's precondition
// (empty training set, mismatched schemas, too few rows for a split).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A score function was requested that the data cannot support
// (Popt without an effort column).
class UnsupportedScore : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration (unknown learner, bad fraction, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace frugal
