#pragma once

#include <stdexcept>
#include <string>

namespace lge {

/// Precondition violated by a caller-supplied value (shape, range, emptiness).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed on-disk data: bad magic, version, shape or truncation.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An object was used out of sequence, e.g. a backward pass with a trace that
/// does not belong to the supplied parameters.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A statistic is undefined for the given data (zero variance input).
class UndefinedStatistic : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Test input with no information left after preprocessing (all paired
/// differences zero).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace lge
