#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace debtav {

/// A value lies outside the mathematical domain of a model function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data fails validation (unknown ids, duplicates, bad ranges).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A well-formed value outside its declared range (for example a Likert
/// answer of 7 on a 1-6 item).
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A text input could not be parsed. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

}  // namespace debtav
