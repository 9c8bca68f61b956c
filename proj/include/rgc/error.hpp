#pragma once

#include <stdexcept>
#include <string>

namespace rgc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue fell at or below the SPD floor (1e-12 x largest eigenvalue).
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// A segment had zero energy after centering.
class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

/// Dataset header/payload inconsistency.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Cross-validation could not build folds with both classes in training.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// No (window, state count) pair yields a stable gain-control design.
class NoStableDesign : public Error {
 public:
  using Error::Error;
};

}  // namespace rgc
