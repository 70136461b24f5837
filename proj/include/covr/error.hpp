#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covr {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number of the offending
/// record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a data invariant (duplicate ids, zero
/// norms, missing vectors, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class VectorFileError : public Error {
 public:
  enum class Kind { BadMagic, Truncated, VersionMismatch, Invalid };

  VectorFileError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// The judge endpoint could not be reached (after retries) or answered with a
/// non-success status.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Training hit a non-finite loss.
class TrainingError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace covr
