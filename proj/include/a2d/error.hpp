#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace a2d {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch, out-of-range label, bad attack parameters.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Malformed model, IDX, CSV or JSON file. `offset` is the byte (or line)
// position where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A pipeline step needs an artifact that an earlier command should have produced.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

}  // namespace a2d
