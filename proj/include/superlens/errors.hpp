#pragma once

#include <stdexcept>
#include <string>

namespace superlens {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition or data invariant was violated (bad input).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The numerics could not produce a trustworthy result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class ProfileTooTall : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class NyquistViolation : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class CutoffOutOfRange : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class EmptyImage : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class BadThreshold : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class ZeroNoise : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

class GridMismatch : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

// gamma_n or eta_n vanishes: the mode is at a Wood/slab resonance.
class ResonantMode : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearSingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateSlab : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace superlens
