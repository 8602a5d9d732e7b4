#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nadyn {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text or file input that cannot be parsed (bad literal, float where a
/// rational is required, malformed JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

class MalformedInterval : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class UnknownExample : public Error {
 public:
  using Error::Error;
};

class HorizonExceeded : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class ScaleMismatch : public Error {
 public:
  using Error::Error;
};

class DegeneratePair : public Error {
 public:
  using Error::Error;
};

/// An IntervalSet grew past the part budget during propagation. Never
/// accompanied by a partial result.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::int64_t step, std::size_t parts, std::size_t max_parts)
      : Error("part budget exceeded at step " + std::to_string(step) + ": " +
              std::to_string(parts) + " parts > budget " + std::to_string(max_parts)),
        step_(step),
        parts_(parts),
        max_parts_(max_parts) {}

  /// 1-based propagation step (0 when raised by a single-map operation).
  std::int64_t step() const noexcept { return step_; }
  /// Part count observed when the budget was crossed (a lower bound on the
  /// full result's part count).
  std::size_t parts() const noexcept { return parts_; }
  std::size_t max_parts() const noexcept { return max_parts_; }

 private:
  std::int64_t step_;
  std::size_t parts_;
  std::size_t max_parts_;
};

}  // namespace nadyn
