#pragma once

#include <stdexcept>
#include <string>

namespace stct {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument's value or shape was violated.
class InputDomainError : public Error {
 public:
  using Error::Error;
};

/// A linear system could not be factorized.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class DegenerateSplitError : public Error {
 public:
  using Error::Error;
};

/// An iterative update produced non-finite values.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Training was asked to run without the labeled objective that anchors it.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated persisted data. `offset()` is the byte offset of
/// the first offending field (the start of the offending line for text).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, long long offset)
      : Error(what), offset_(offset) {}
  long long offset() const noexcept { return offset_; }

 private:
  long long offset_;
};

/// Bad configuration or command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace stct
