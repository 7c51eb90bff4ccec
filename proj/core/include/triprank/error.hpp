#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace triprank {

/// Bad user input (malformed CSV, too few trips, unknown column). CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema or configuration conflict. CLI exit code 3.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRow : public InputError {
 public:
  MalformedRow(std::size_t line, std::size_t expected, std::size_t got)
      : InputError("malformed row at line " + std::to_string(line) + ": expected " +
                   std::to_string(expected) + " columns, got " + std::to_string(got)),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class BadDate : public InputError {
 public:
  BadDate(std::size_t line, const std::string& value)
      : InputError("bad date at line " + std::to_string(line) + ": '" + value + "'"),
        line_(line),
        value_(value) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::size_t line_;
  std::string value_;
};

class MissingColumn : public InputError {
 public:
  explicit MissingColumn(const std::string& column)
      : InputError("missing column '" + column + "'"), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class TooFewTrips : public InputError {
 public:
  using InputError::InputError;
};

class TripTooShort : public InputError {
 public:
  using InputError::InputError;
};

class EmptyInput : public InputError {
 public:
  using InputError::InputError;
};

class LengthMismatch : public std::invalid_argument {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : std::invalid_argument("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SchemaMismatch : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class ConfigError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

}  // namespace triprank
