#pragma once

#include <stdexcept>
#include <string>

namespace ddnoise {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or sequence violates one of its invariants. The message names the invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configured size or combinatorial cap was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Floating-point failure: ambiguous null space, lost resolution, no convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddnoise
