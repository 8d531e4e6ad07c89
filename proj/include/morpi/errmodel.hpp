#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "morpi/simgen.hpp"
#include "morpi/types.hpp"

namespace morpi {

/// Deterministic error sources of the closed-form assessment: initial
/// velocity error plus constant sensor biases. Initial position and
/// misalignment errors are zero by assumption.
struct ErrorInputs {
  Vec3 dv0 = Vec3::Zero();  // [m/s]
  Vec3 ba = Vec3::Zero();   // [m/s^2]
  Vec3 bg = Vec3::Zero();   // [rad/s]
  double gravity = kDefaultGravity;

  /// g + b_az, the tilt scale of the printed error polynomial.
  double alpha() const { return gravity + ba.z(); }

  /// g - b_az: the magnitude of the measured stationary specific force's
  /// vertical component in the z-down frame. This is the scale the
  /// mechanization actually exhibits and the one the closed forms use (see
  /// transition_matrix).
  double tilt_scale() const { return gravity - ba.z(); }
};

using Mat15 = Eigen::Matrix<double, 15, 15>;

/// 15-state error dynamics matrix for state (dp, dv, eps, ba, bg):
/// dp' = dv, dv' = -(f^n x) eps + C ba, eps' = C bg.
Mat15 system_matrix(const Vec3& f_n, const Mat3& C);

/// Closed-form transition matrix for the straight-line short-time case
/// (C = I, constant specific force). The specific force is the stationary
/// measured one, (b_ax, b_ay, b_az - g): with z down an ideal level
/// accelerometer reads -g on its z axis, and the biases ride on top.
///
/// Exactly exp(system_matrix(f, I) * t); upper block-triangular with
/// identity diagonal blocks.
Mat15 transition_matrix(double t, const ErrorInputs& inputs);

/// Horizontal distance error of the 3D INS after time t: the norm of the
/// (dp_x, dp_y) polynomials produced by the transition matrix, with all
/// b_gz-dependent terms discarded (the heading error is common to every
/// method compared).
double ins_error_3d(double t, const ErrorInputs& inputs);

/// Planar reduction: gyro x/y biases and the accelerometer z bias drop out.
double ins_error_2d(double t, const ErrorInputs& inputs);

/// Cumulative peak-to-peak distance error: after N segments,
/// ds(N) = sum_k (dG_fraction * gain) * delta_f_k. Returns one value per
/// completed segment. Exactly linear in dG_fraction and in the gain.
std::vector<double> morpi_error(double dG_fraction,
                                const std::vector<double>& delta_f,
                                double gain_value);

/// e3d/e2d/MoRPI error curves over a common time grid; the MoRPI curves are
/// step functions that jump when a segment completes.
struct ErrorBudget {
  std::vector<double> t, e3d, e2d;
  std::vector<double> morpi_dg;               // gain-error fractions
  std::vector<std::vector<double>> morpi_ds;  // one step curve per fraction
};

ErrorBudget make_error_budget(const ErrorInputs& inputs,
                              const std::vector<double>& time_grid,
                              const std::vector<double>& morpi_dg,
                              const std::vector<double>& delta_f,
                              const std::vector<double>& segment_end_times,
                              double gain_value);

/// Default grid 0..15 s at 10 ms.
std::vector<double> default_time_grid();

/// Delimited-text export `t, e3d, e2d, morpi_ds(...)`.
void write_budget_log(std::ostream& out, const ErrorBudget& budget);

/// Empirical vs closed-form error over time: mechanizes simgen data with
/// injected biases (and optional white noise) and compares against
/// ins_error_3d / ins_error_2d.
struct MonteCarloReport {
  std::vector<double> t;
  std::vector<double> closed_3d, closed_2d;
  std::vector<double> mean_3d, mean_2d;  // across trials
  std::vector<double> max_3d, min_3d;    // spread across trials
  int trials = 0;
};

MonteCarloReport monte_carlo_check(const TrajectorySpec& trajectory,
                                   const ErrorInputs& inputs, int trials,
                                   std::uint64_t seed,
                                   double accel_noise_density = 0.0,
                                   double gyro_noise_density = 0.0);

}  // namespace morpi
