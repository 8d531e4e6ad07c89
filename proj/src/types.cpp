#include "morpi/types.hpp"

#include <algorithm>
#include <cmath>

#include "morpi/errors.hpp"

namespace morpi {

ImuSequence ImuSequence::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > samples.size())
    throw StructuralError("slice range [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") out of bounds");
  ImuSequence out;
  out.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     samples.begin() + static_cast<std::ptrdiff_t>(end));
  out.rate_hz = rate_hz;
  out.meta = meta;
  return out;
}

double ImuSequence::median_rate(const std::vector<ImuSample>& samples) {
  if (samples.size() < 2) return 0.0;
  std::vector<double> dt;
  dt.reserve(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i)
    dt.push_back(samples[i].t - samples[i - 1].t);
  auto mid = dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2);
  std::nth_element(dt.begin(), mid, dt.end());
  double median_dt = *mid;
  if (dt.size() % 2 == 0) {
    double lower = *std::max_element(dt.begin(), mid);
    median_dt = 0.5 * (median_dt + lower);
  }
  return median_dt > 0.0 ? 1.0 / median_dt : 0.0;
}

void ImuSequence::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ImuSample& s = samples[i];
    if (!std::isfinite(s.t) || !s.f.allFinite() || !s.w.allFinite())
      throw StructuralError("non-finite sample at index " + std::to_string(i));
    if (i > 0 && s.t <= samples[i - 1].t)
      throw StructuralError("non-monotone timestamp at index " +
                            std::to_string(i));
  }
  if (samples.size() >= 2) {
    double med = median_rate(samples);
    if (!(rate_hz > 0.0))
      throw StructuralError("nominal rate must be positive");
    if (std::abs(rate_hz - med) > 0.2 * med)
      throw StructuralError("nominal rate " + std::to_string(rate_hz) +
                            " Hz further than 20% from median " +
                            std::to_string(med) + " Hz");
  }
}

bool is_orthonormal(const Mat3& C, double tol) {
  Mat3 r = C.transpose() * C - Mat3::Identity();
  return r.cwiseAbs().maxCoeff() < tol && std::abs(C.determinant() - 1.0) < tol;
}

SensorSpec SensorSpec::mpu6500() {
  SensorSpec s;
  s.gyro_bias = Vec3::Constant(6.0 * kDegToRad);
  s.gyro_noise_density = 0.01 * kDegToRad;
  s.accel_bias = Vec3::Constant(60e-3 * kStandardGravity);
  s.accel_noise_density = 300e-6 * kStandardGravity;
  return s;
}

SensorSpec SensorSpec::lsm6dsl() {
  SensorSpec s;
  s.gyro_bias = Vec3::Constant(3.0 * kDegToRad);
  s.gyro_noise_density = 0.004 * kDegToRad;
  s.accel_bias = Vec3::Constant(40e-3 * kStandardGravity);
  s.accel_noise_density = 130e-6 * kStandardGravity;
  return s;
}

SensorSpec SensorSpec::by_name(const std::string& name) {
  if (name == "ideal") return ideal();
  if (name == "mpu6500") return mpu6500();
  if (name == "lsm6dsl") return lsm6dsl();
  throw ConfigError("unknown sensor preset '" + name +
                    "' (expected ideal, mpu6500 or lsm6dsl)");
}

FrameConventions frame_conventions() {
  return {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), "start point"};
}

Vec3 gravity_nav(double g) { return {0.0, 0.0, g}; }

Vec3 stationary_specific_force(double g) { return {0.0, 0.0, -g}; }

}  // namespace morpi
