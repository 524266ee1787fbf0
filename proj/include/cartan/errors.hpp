#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace cartan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jets of incompatible layout or scalar kind combined, or an index out of range.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value left the domain of a function, a division by (near) zero, or a
/// non-finite coefficient appeared.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression text. `position()` is the 0-based byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Evaluation failure inside an expression; carries the offending node's position.
class EvalError : public DomainError {
 public:
  EvalError(const std::string& what, std::size_t position)
      : DomainError(what + " (expression position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// The Levi form degenerates (|Levi factor| or |l(F)| below tolerance).
class LeviDegenerateError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A point does not lie on the hypersurface, or outside a chart's domain.
class ChartError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Unknown model, chart or option.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Short scientific rendering of a number for error messages.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace cartan
