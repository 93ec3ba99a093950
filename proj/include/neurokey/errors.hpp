#pragma once

#include <stdexcept>
#include <string>

namespace neurokey {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to an operation (non-finite input, dimension mismatch, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; message carries the offending line/offset.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input too short for the requested operation.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Numerically rank-deficient design matrix in a least-squares solve.
class RankError : public Error {
 public:
  using Error::Error;
};

// Unsupported code/parameter combination.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Mask generation failed to find an invertible matrix.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Noisy reading is too far from the enrolled word to correct.
class IrrecoverableError : public Error {
 public:
  using Error::Error;
};

// Key reproduction failed verification; no key material is returned.
class AuthenticationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Frame counter space exhausted under the current session key.
class RekeyRequiredError : public Error {
 public:
  using Error::Error;
};

}  // namespace neurokey
