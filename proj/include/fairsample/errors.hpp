#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fairsample {

// Base class for all recoverable failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::int64_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

// Rejection sampling exceeded its retry budget with no way to make progress.
class SamplerExhaustedError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// An API precondition was violated; indicates a bug in the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CheckpointError : public DataError {
 public:
  enum class Kind { io, bad_magic, bad_version, truncated, dimension_mismatch };

  CheckpointError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace fairsample
