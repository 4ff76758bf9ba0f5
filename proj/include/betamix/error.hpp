#pragma once

#include <stdexcept>
#include <string>

namespace betamix {

// Base of every error raised by the library. The CLI maps the subclasses onto
// exit statuses, so new error kinds should derive from one of these.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a structural invariant (shapes, normalization, labels).
class MalformedInput : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A hypothesis of a bound is not satisfied by the supplied parameters.
// The message quotes the failed inequality.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

// Explicit representation would exceed a configured size cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Required information (exact marginals, true regression function) is absent.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// A rate fit has no usable data points.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// File system or stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace betamix
