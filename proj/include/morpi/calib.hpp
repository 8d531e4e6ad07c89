#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "morpi/ingest.hpp"
#include "morpi/types.hpp"

namespace morpi {

/// Processing variants: raw data, gyro calibrated, gyro + accelerometer
/// calibrated. Calibration is zero-order: the stationary-window mean is
/// taken as a constant bias and subtracted.
enum class CalibMode { RD, GC, GAC };

CalibMode calib_mode_from_string(std::string_view name);
const char* to_string(CalibMode mode);

struct CalibResult {
  Vec3 gyro_bias = Vec3::Zero();
  std::optional<Vec3> accel_bias;  // set for GAC only
  StationaryWindow source_window{};
};

/// Per-axis mean of w over the window. Throws CalibrationError when the
/// window is shorter than min_duration_s.
Vec3 estimate_gyro_bias(const ImuSequence& seq, const StationaryWindow& win,
                        double min_duration_s = 1.0);

/// Per-axis mean of f over the window minus the expected stationary reading
/// (0, 0, -g); assumes the platform is level.
Vec3 estimate_accel_bias(const ImuSequence& seq, const StationaryWindow& win,
                         double gravity = kDefaultGravity,
                         double min_duration_s = 1.0);

/// Finds the head stationary window, truncates it to `calib_window_s`, and
/// estimates the biases the mode requires. Implausible magnitudes
/// (gyro >= 0.5 rad/s, accel >= 2 m/s^2) indicate a non-stationary window
/// and raise CalibrationError.
CalibResult calibrate(const ImuSequence& seq, CalibMode mode,
                      const StationaryConfig& cfg = {},
                      double calib_window_s = 3.0);

/// Subtracts the biases the mode requires; RD returns the input unchanged.
ImuSequence apply_calibration(const ImuSequence& seq, const CalibResult& calib,
                              CalibMode mode);

/// calibrate() + apply_calibration() in one call.
ImuSequence calibrated(const ImuSequence& seq, CalibMode mode,
                       const StationaryConfig& cfg = {});

/// Key-value text serialization for reuse across runs.
void save_calib(const std::filesystem::path& path, const CalibResult& calib);
CalibResult load_calib(const std::filesystem::path& path);

}  // namespace morpi
