#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "morpi/types.hpp"

namespace morpi {

/// Maps an arbitrary delimited-text log layout onto the canonical
/// `t, fx, fy, fz, wx, wy, wz` SI column set.
struct FormatConfig {
  char delimiter = ',';
  int header_rows = 1;
  int col_t = 0;
  int col_f[3] = {1, 2, 3};
  int col_w[3] = {4, 5, 6};
  double time_scale = 1.0;   // multiply source time to get seconds
  double accel_scale = 1.0;  // multiply source accel to get m/s^2
  double gyro_scale = 1.0;   // multiply source rate to get rad/s
  bool rebase_time = false;  // subtract the first timestamp
  /// Applied to both f and w at ingestion, for logs whose axes differ from
  /// the x-forward / y-right / z-down body convention.
  Mat3 axis_permutation = Mat3::Identity();
};

/// Parses a delimited-text IMU log. Throws ParseError (with line number),
/// StructuralError (empty file, non-monotone time) or ConfigError
/// (missing columns).
ImuSequence parse_imu_log(std::istream& source, const FormatConfig& cfg = {});

ImuSequence load_imu_file(const std::filesystem::path& path,
                          const FormatConfig& cfg = {});

/// Canonical export: header row, comma separated, shortest round-trippable
/// decimal representation. parse(serialize(seq)) preserves every value
/// bit-for-bit.
void write_imu_log(std::ostream& out, const ImuSequence& seq);

void save_imu_file(const std::filesystem::path& path, const ImuSequence& seq);

/// Contiguous stationary sample range [start_idx, end_idx).
struct StationaryWindow {
  std::size_t start_idx = 0;
  std::size_t end_idx = 0;
  double duration = 0.0;
};

struct StationaryConfig {
  double window_s = 0.5;        // sliding std window
  double min_duration_s = 1.0;  // minimum accepted window length
  double gyro_std_max = 0.02;   // [rad/s] on |w|
  double accel_std_max = 0.15;  // [m/s^2] on |f| - g
  double gravity = kDefaultGravity;
};

/// Maximal windows where the sliding-window standard deviations of |w| and
/// of (|f| - g) are both below the thresholds, sorted by start index.
/// Windows never overlap and respect the minimum duration.
std::vector<StationaryWindow> detect_stationary(
    const ImuSequence& seq, const StationaryConfig& cfg = {});

/// Moving portion of a recording: from the end of the first head window to
/// the start of the last tail window, as a half-open range. Falls back to
/// the full sequence when no windows qualify.
struct MotionBounds {
  std::size_t begin = 0;
  std::size_t end = 0;
};

MotionBounds motion_bounds(const ImuSequence& seq,
                           const std::vector<StationaryWindow>& windows);

}  // namespace morpi
