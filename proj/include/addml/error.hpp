#pragma once

#include <stdexcept>
#include <string>

namespace addml {

// Base of every error the engine raises. The CLI maps Error to exit code 1
// and ConfigError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidArchitecture : public Error {
 public:
  using Error::Error;
};

// Non-finite values in inputs, losses or parameters.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Empty batch / validation set / training matrix / mining selection.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ModeError : public Error {
 public:
  using Error::Error;
};

// CSV parse failures; message carries the line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Model artifact problems: bad magic, version mismatch, checksum, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UndefinedAucError : public Error {
 public:
  using Error::Error;
};

}  // namespace addml
