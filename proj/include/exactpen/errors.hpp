#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace exactpen {

/// Dimension mismatch between operands.
class SizingError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite numbers, labels outside {-1,+1}, malformed CSR arrays and the like.
class InvalidDataError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A requested count (K, kappa, cap) is outside its admissible range.
class RangeError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string &what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Raised when the relaxed active set has more members than the configured cap.
class ActiveSetOverflow : public std::runtime_error {
public:
  explicit ActiveSetOverflow(std::size_t cap)
      : std::runtime_error("active set exceeds cap of " + std::to_string(cap) + " patterns"),
        cap_(cap) {}

  std::size_t cap() const noexcept { return cap_; }

private:
  std::size_t cap_;
};

/// Backtracking did not find an acceptable step within its hard cap.
class LineSearchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The objective became non-finite during an iteration.
class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Synthetic instance generation could not certify its planted point.
class GenerationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace exactpen
