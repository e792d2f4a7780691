#pragma once

#include <stdexcept>
#include <string>

namespace qfratio {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (shapes, ranges, non-PSD B, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that the requested analysis does not cover,
/// e.g. a degenerate ratio or a tail limit requested for a case 2(a) edge.
class UnsupportedInstance : public Error {
 public:
  using Error::Error;
};

/// Eigensolver, root finder or quadrature failed to reach its tolerance.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace qfratio
