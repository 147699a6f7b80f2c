#pragma once

#include <stdexcept>
#include <string>

namespace spatent {

/// Base for all library failures. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (z < 0, bad order, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Evaluation requested exactly at a pole.
class PoleError : public DomainError {
public:
  using DomainError::DomainError;
};

/// Series, root finder or quadrature failed to reach its tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

class QuadratureError : public ConvergenceError {
public:
  using ConvergenceError::ConvergenceError;
};

/// Invalid user input: mode sets, distributions, run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// The beamsplitter identity failed; must never happen.
class IdentityViolation : public Error {
public:
  using Error::Error;
};

} // namespace spatent
