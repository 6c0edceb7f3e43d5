#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace chainlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input that violates an operation's precondition (shape, finiteness, range).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class AsymmetryError : public Error {
 public:
  AsymmetryError(std::size_t i, std::size_t j, double dij, double dji);
  std::size_t i, j;
};

class NegativeDistanceError : public Error {
 public:
  NegativeDistanceError(std::size_t i, std::size_t j, double value);
  std::size_t i, j;
};

/// d(i,k) > d(i,j) + d(j,k); the witness triple is (i, j, k).
class TriangleViolation : public Error {
 public:
  TriangleViolation(std::size_t i, std::size_t j, std::size_t k, double dik, double dij, double djk);
  std::array<std::size_t, 3> witness;
};

class SizeLimitExceeded : public Error {
 public:
  SizeLimitExceeded(const std::string& what, std::size_t size, std::size_t limit);
};

class DegenerateCovariance : public Error {
 public:
  using Error::Error;
};

class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

class ZeroDistancePair : public Error {
 public:
  ZeroDistancePair(std::size_t a, std::size_t b);
};

class AdmissibilityViolation : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class AbsoluteContinuityError : public Error {
 public:
  using Error::Error;
};

class BadConfiguration : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace chainlab
