#pragma once

#include <stdexcept>
#include <string>

namespace radner {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: corpus files, lexicons, rule files, configs.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model or resource bundles (missing parts, vocab/type mismatch).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Precondition violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace radner
