#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "morpi/types.hpp"

namespace morpi {

enum class TrajectoryShape { Straight, Sine, LShape };

TrajectoryShape trajectory_shape_from_string(std::string_view name);

/// Planar ground-truth trajectory description. The robot is stationary for
/// head_stationary_s, traverses the path at constant arc speed (with C^2
/// speed ramps of ramp_s at both ends), then rests for tail_stationary_s.
struct TrajectorySpec {
  TrajectoryShape shape = TrajectoryShape::Straight;
  double length_m = 6.3;       // base-course length; L-shape: first leg
  double leg2_m = 10.0;        // L-shape second leg
  double turn_radius_m = 0.5;  // L-shape corner rounding
  double amplitude_m = 0.1;    // sine lateral amplitude
  double period_m = 1.0;       // sine spatial wavelength along the course
  /// The sine's lateral offset is faded in/out over this many wavelengths so
  /// the robot starts and ends aligned with the course.
  double envelope_periods = 1.0;
  double speed_mps = 1.0;      // cruise arc speed
  double ramp_s = 0.5;         // speed ramp duration
  double head_stationary_s = 3.0;
  double tail_stationary_s = 3.0;
  double rate_hz = 100.0;

  void validate() const;  // throws ConfigError
};

/// Sampled planar poses plus (when produced by generate_truth) the exact
/// kinematics used to synthesize ideal IMU readings.
struct TruthTrajectory {
  std::vector<double> t, x, y, psi;
  double path_length = 0.0;

  // analytic kinematics; empty when the trajectory was loaded from file
  std::vector<double> ax, ay, psidot;

  bool has_kinematics() const { return !ax.empty(); }
  Vec2 endpoint() const {
    return t.empty() ? Vec2::Zero() : Vec2(x.back(), y.back());
  }
};

TruthTrajectory generate_truth(const TrajectorySpec& spec);

/// Inverse mechanization: body-frame specific force and angular rate that
/// reproduce the truth. Uses the analytic kinematics when available and
/// second-order finite differences otherwise. At rest the output is exactly
/// (0, 0, -g) and zero angular rate.
ImuSequence imu_from_truth(const TruthTrajectory& truth,
                           double gravity = kDefaultGravity);

/// Adds per-axis constant bias and white noise with standard deviation
/// density * sqrt(rate). Bit-reproducible for a given seed.
ImuSequence corrupt(const ImuSequence& seq, const SensorSpec& spec,
                    std::uint64_t seed);

/// Delimited-text export `t, x, y, psi` and its loader (no kinematics).
void write_truth_log(std::ostream& out, const TruthTrajectory& truth);
void save_truth_file(const std::filesystem::path& path,
                     const TruthTrajectory& truth);
TruthTrajectory load_truth_file(const std::filesystem::path& path);

}  // namespace morpi
