#pragma once

#include <stdexcept>

namespace affsup {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension or parameter-set mismatch.
struct ShapeError : Error {
  using Error::Error;
};

// Bad configuration value (negative gamma, unknown key, step out of range).
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite value where a finite one is required.
struct NumericError : Error {
  using Error::Error;
};

// Supervision target selects nothing a log-based loss can act on.
struct DegenerateTargetError : Error {
  using Error::Error;
};

// Dataset/scene file missing, truncated, or malformed.
struct IngestionError : Error {
  using Error::Error;
};

// Backward called with an invalid or mismatched forward cache.
struct StateError : Error {
  using Error::Error;
};

// Metric undefined for the given inputs (e.g. empty truth set).
struct UndefinedMetricError : Error {
  using Error::Error;
};

}  // namespace affsup
