#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trackid {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed records that disagree with each other (e.g. score-vector lengths).
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A value outside its permitted range. Carries the input line when parsing.
class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyScores : public Error {
 public:
  EmptyScores() : Error("detection has an empty score vector") {}
};

class DanglingReference : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class NoAnnotations : public Error {
 public:
  NoAnnotations() : Error("sequence carries no annotated frames") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidK : public Error {
 public:
  explicit InvalidK(int k) : Error("k must be at least 2, got " + std::to_string(k)) {}
};

}  // namespace trackid
