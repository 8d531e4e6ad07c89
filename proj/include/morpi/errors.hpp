#pragma once

#include <stdexcept>
#include <string>

namespace morpi {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad configuration: missing columns, invalid mode, inconsistent options.
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed input data (carries a line number in the message when known).
struct ParseError : Error {
  using Error::Error;
};

/// Structurally invalid data: non-monotone time, too few samples.
struct StructuralError : Error {
  using Error::Error;
};

/// Calibration could not be performed (window too short, implausible bias).
struct CalibrationError : Error {
  using Error::Error;
};

/// A computation could not produce a result (e.g. insufficient periodicity).
struct ComputationError : Error {
  using Error::Error;
};

}  // namespace morpi
