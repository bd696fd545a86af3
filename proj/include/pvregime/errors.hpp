#pragma once

#include <stdexcept>
#include <string>

namespace pvregime {

// Malformed input text (CSV, JSON). Carries the 1-based source line when known.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg, long line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

// Timestamps that cannot be placed on the sampling grid (off-grid ties,
// duplicates, out-of-range indices).
class GridError : public ParseError {
public:
  using ParseError::ParseError;
};

// Degenerate estimation problems: rank-deficient designs, empty sample sets,
// windows with no usable clear-sky signal.
class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Dynamic-programming failure: every path has probability zero.
class DecodeError : public std::runtime_error {
public:
  explicit DecodeError(const std::string& msg, int sample = -1)
      : std::runtime_error(msg), sample_(sample) {}
  int sample() const { return sample_; }

private:
  int sample_;
};

// Iterative solver produced a non-finite objective.
class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Inconsistent vector/matrix dimensions.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pvregime
