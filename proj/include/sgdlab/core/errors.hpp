#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgdlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : Error {
  using Error::Error;
};

struct RangeError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct NotPsdError : DomainError {
  using DomainError::DomainError;
};

struct DegenerateFitError : DomainError {
  using DomainError::DomainError;
};

// Thrown when an iterate or integrated state stops being finite.
struct DivergenceError : DomainError {
  DivergenceError(const std::string& what, std::int64_t step, double time)
      : DomainError(what), step(step), time(time) {}
  std::int64_t step;
  double time;
};

}  // namespace sgdlab
