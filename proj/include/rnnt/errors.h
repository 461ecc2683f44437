// include/rnnt/errors.h
//
// Exception types thrown by the library.

#ifndef RNNT_ERRORS_H_
#define RNNT_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rnnt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent dimensions, out-of-range indices, invalid arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  kBadMagic,
  kUnsupportedVersion,
  kUnknownDtype,
  kTruncated,
  kDimensionOverflow,
  kMalformed,
};

class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string &what)
      : Error(what), kind_(kind) {}
  FormatErrorKind Kind() const { return kind_; }

 private:
  FormatErrorKind kind_;
};

class CycleError : public Error {
 public:
  using Error::Error;
};

// Raised by composition on unsorted inputs, epsilon labels or conflicting
// auxiliary indices.
class ComposeError : public Error {
 public:
  using Error::Error;
};

// The lattice has no complete path with finite weight; the loss is +inf.
class NoPathError : public Error {
 public:
  NoPathError() : Error("no path: lattice has no complete finite-weight path") {}
  explicit NoPathError(const std::string &what) : Error(what) {}
};

}  // namespace rnnt

#endif  // RNNT_ERRORS_H_
