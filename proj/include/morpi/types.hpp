#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace morpi {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Gravity magnitude used by the mechanization unless overridden [m/s^2].
inline constexpr double kDefaultGravity = 9.81;

/// Standard gravity, used only to convert datasheet units (mg, ug/sqrt(Hz)).
inline constexpr double kStandardGravity = 9.80665;

inline constexpr double kDegToRad = 0.017453292519943295;

/// One timestamped IMU reading in the body frame.
/// f is specific force [m/s^2], w is angular rate [rad/s].
struct ImuSample {
  double t = 0.0;
  Vec3 f = Vec3::Zero();
  Vec3 w = Vec3::Zero();
};

/// An ordered IMU recording with a nominal sampling rate.
///
/// Invariants (checked by validate()): timestamps strictly increasing, all
/// components finite, nominal rate within 20% of the median 1/dt.
struct ImuSequence {
  std::vector<ImuSample> samples;
  double rate_hz = 0.0;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const {
    return samples.size() < 2 ? 0.0 : samples.back().t - samples.front().t;
  }

  /// Half-open sample range [begin, end) as a new sequence.
  ImuSequence slice(std::size_t begin, std::size_t end) const;

  /// Median of 1/dt over the sequence; 0 if fewer than 2 samples.
  static double median_rate(const std::vector<ImuSample>& samples);

  /// Throws StructuralError on any invariant violation.
  void validate() const;
};

/// Position, velocity and body-to-navigation attitude at one instant.
struct NavState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 C = Mat3::Identity();
};

/// max-norm test of C^T C - I and det(C) - 1.
bool is_orthonormal(const Mat3& C, double tol = 1e-9);

/// Constant-bias and white-noise description of an IMU, SI units.
struct SensorSpec {
  Vec3 accel_bias = Vec3::Zero();       // [m/s^2]
  Vec3 gyro_bias = Vec3::Zero();        // [rad/s]
  double accel_noise_density = 0.0;     // [m/s^2/sqrt(Hz)]
  double gyro_noise_density = 0.0;      // [rad/s/sqrt(Hz)]
  double gravity = kDefaultGravity;     // [m/s^2]

  static SensorSpec ideal() { return {}; }

  /// TDK InvenSense MPU-6500 datasheet errors (6 deg/s, 0.01 deg/s/sqrt(Hz),
  /// 60 mg, 300 ug/sqrt(Hz)), converted to SI on every axis.
  static SensorSpec mpu6500();

  /// STMicroelectronics LSM6DSL datasheet errors (3 deg/s,
  /// 0.004 deg/s/sqrt(Hz), 40 mg, 130 ug/sqrt(Hz)).
  static SensorSpec lsm6dsl();

  static SensorSpec by_name(const std::string& name);
};

/// Axis convention shared by every module: x forward, y right, z down,
/// navigation frame fixed at the start point.
struct FrameConventions {
  Vec3 x_axis;  // forward, towards the moving direction
  Vec3 y_axis;  // right, completes the orthogonal set
  Vec3 z_axis;  // down
  const char* navigation_origin;
};

FrameConventions frame_conventions();

/// Gravity vector in the navigation frame: (0, 0, +g) with z down.
Vec3 gravity_nav(double g = kDefaultGravity);

/// Specific force a level, stationary accelerometer reads: (0, 0, -g).
Vec3 stationary_specific_force(double g = kDefaultGravity);

}  // namespace morpi
