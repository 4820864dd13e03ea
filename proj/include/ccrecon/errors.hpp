#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccrecon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameter estimation failed or the data is degenerate.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling could not produce a value in the truncation window.
class SamplingError : public Error {
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

class ParseError : public IoError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : IoError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ccrecon
