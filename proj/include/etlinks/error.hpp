#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etlinks {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input or data. The CLI maps these to exit status 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Operands with incompatible shapes.
class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

enum class ParseErrorKind {
  malformed_header,
  wrong_coordinate_count,
  malformed_coordinate,
  non_finite_coordinate,
  duplicate_key,
  entry_count_mismatch,
  empty_token,
  truncated_record,
};

/// Embedding file rejected. `location` is a 1-based line for text input and
/// a byte offset for binary input.
class ParseError : public InputError {
 public:
  ParseError(ParseErrorKind kind, std::size_t location, const std::string& what)
      : InputError(what), kind_(kind), location_(location) {}
  ParseErrorKind kind() const noexcept { return kind_; }
  std::size_t location() const noexcept { return location_; }

 private:
  ParseErrorKind kind_;
  std::size_t location_;
};

class NormalizationError : public InputError {
 public:
  NormalizationError(std::string key, const std::string& what)
      : InputError(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class TableErrorKind {
  missing_column,
  malformed_row,
  bad_number,
  negative_value,
  duplicate,
  empty_field,
};

/// CSV table rejected. `line` is the 1-based line where the record starts.
class TableError : public InputError {
 public:
  TableError(TableErrorKind kind, std::size_t line, const std::string& what)
      : InputError(what), kind_(kind), line_(line) {}
  TableErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  TableErrorKind kind_;
  std::size_t line_;
};

class RefinementError : public InputError {
 public:
  RefinementError(int round, const std::string& what) : InputError(what), round_(round) {}
  int round() const noexcept { return round_; }

 private:
  int round_;
};

/// Network or protocol failure while harvesting.
class HarvestError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace etlinks
