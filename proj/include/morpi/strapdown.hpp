#pragma once

#include <iosfwd>
#include <vector>

#include "morpi/types.hpp"

namespace morpi {

/// Trajectory produced by mechanization, one state per input sample.
struct NavSolution {
  std::vector<double> t;
  std::vector<NavState> states;
  std::vector<double> yaw;

  /// Final planar position (x, y).
  Vec2 travelled_endpoint() const;
};

Mat3 skew(const Vec3& v);

/// exp([phi x]) in Rodrigues form; exact for any rotation vector.
Mat3 rodrigues(const Vec3& phi);

/// Symmetric orthogonalization: nearest rotation to C (one polar Newton step).
Mat3 orthonormalize(const Mat3& C);

/// One attitude step of Cdot = C Omega: right-multiplies by exp([w dt x])
/// and re-orthonormalizes.
Mat3 propagate_attitude(const Mat3& C, const Vec3& w, double dt);

/// atan2(C(1,0), C(0,0)), in (-pi, pi]. Throws ComputationError when C is
/// gimbal-degenerate (|C(2,0)| ~ 1), which planar motion never produces.
double yaw_of(const Mat3& C);

/// Full 3D strapdown mechanization: integrates pdot = v, vdot = C f + g,
/// Cdot = C Omega from `init`. Attitude uses the exact per-step matrix
/// exponential, velocity and position the trapezoidal rule. Earth and
/// transport rates are neglected.
NavSolution mechanize_3d(const ImuSequence& seq, const NavState& init = {},
                         double gravity = kDefaultGravity);

struct PlanarState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  double yaw = 0.0;
};

/// Planar reduction: only x-y position/velocity and the yaw angle are
/// integrated; f_z, w_x and w_y are ignored.
NavSolution mechanize_2d(const ImuSequence& seq, const PlanarState& init = {},
                         double gravity = kDefaultGravity);

/// Delimited-text export: `t, x, y, z, vx, vy, vz, yaw`.
void write_nav_log(std::ostream& out, const NavSolution& nav);

}  // namespace morpi
