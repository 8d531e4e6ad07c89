#include "morpi/errmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "morpi/errors.hpp"
#include "morpi/strapdown.hpp"

namespace morpi {

Mat15 system_matrix(const Vec3& f_n, const Mat3& C) {
  Mat15 F = Mat15::Zero();
  F.block<3, 3>(0, 3) = Mat3::Identity();
  F.block<3, 3>(3, 6) = -skew(f_n);
  F.block<3, 3>(3, 9) = C;
  F.block<3, 3>(6, 12) = C;
  return F;
}

Mat15 transition_matrix(double t, const ErrorInputs& inputs) {
  Vec3 f(inputs.ba.x(), inputs.ba.y(), inputs.ba.z() - inputs.gravity);
  Mat3 fx = skew(f);
  Mat3 I = Mat3::Identity();

  Mat15 phi = Mat15::Identity();
  phi.block<3, 3>(0, 3) = t * I;                      // dp <- dv
  phi.block<3, 3>(0, 6) = -fx * (t * t / 2.0);        // P_t
  phi.block<3, 3>(0, 9) = I * (t * t / 2.0);          // Q_t
  phi.block<3, 3>(0, 12) = -fx * (t * t * t / 6.0);   // T_t
  phi.block<3, 3>(3, 6) = -fx * t;                    // S_t
  phi.block<3, 3>(3, 9) = I * t;                      // R_t
  phi.block<3, 3>(3, 12) = -fx * (t * t / 2.0);       // M_t
  phi.block<3, 3>(6, 12) = I * t;                     // R_t
  return phi;
}

namespace {

/// Horizontal position-error components after time t with b_gz discarded.
void error_polynomials(double t, const ErrorInputs& in, double& dpx,
                       double& dpy) {
  double s = in.tilt_scale();
  double t2 = t * t, t3 = t2 * t;
  dpx = in.dv0.x() * t + 0.5 * in.ba.x() * t2 - s * in.bg.y() * t3 / 6.0;
  dpy = in.dv0.y() * t + 0.5 * in.ba.y() * t2 + s * in.bg.x() * t3 / 6.0;
}

}  // namespace

double ins_error_3d(double t, const ErrorInputs& inputs) {
  if (t < 0.0) throw ComputationError("error model needs t >= 0");
  double dpx, dpy;
  error_polynomials(t, inputs, dpx, dpy);
  return std::hypot(dpx, dpy);
}

double ins_error_2d(double t, const ErrorInputs& inputs) {
  if (t < 0.0) throw ComputationError("error model needs t >= 0");
  double dpx = inputs.dv0.x() * t + 0.5 * inputs.ba.x() * t * t;
  double dpy = inputs.dv0.y() * t + 0.5 * inputs.ba.y() * t * t;
  return std::hypot(dpx, dpy);
}

std::vector<double> morpi_error(double dG_fraction,
                                const std::vector<double>& delta_f,
                                double gain_value) {
  if (dG_fraction < 0.0)
    throw ComputationError("gain-error fraction must be non-negative");
  std::vector<double> ds;
  ds.reserve(delta_f.size());
  double acc = 0.0;
  for (double df : delta_f) {
    acc += dG_fraction * gain_value * df;
    ds.push_back(acc);
  }
  return ds;
}

ErrorBudget make_error_budget(const ErrorInputs& inputs,
                              const std::vector<double>& time_grid,
                              const std::vector<double>& morpi_dg,
                              const std::vector<double>& delta_f,
                              const std::vector<double>& segment_end_times,
                              double gain_value) {
  if (delta_f.size() != segment_end_times.size())
    throw ConfigError("delta_f and segment_end_times must have equal length");
  ErrorBudget budget;
  budget.t = time_grid;
  budget.morpi_dg = morpi_dg;
  budget.e3d.reserve(time_grid.size());
  budget.e2d.reserve(time_grid.size());
  for (double t : time_grid) {
    budget.e3d.push_back(ins_error_3d(t, inputs));
    budget.e2d.push_back(ins_error_2d(t, inputs));
  }
  for (double dg : morpi_dg) {
    std::vector<double> cumulative = morpi_error(dg, delta_f, gain_value);
    std::vector<double> curve;
    curve.reserve(time_grid.size());
    for (double t : time_grid) {
      // number of segments completed by time t
      std::size_t n = static_cast<std::size_t>(
          std::upper_bound(segment_end_times.begin(), segment_end_times.end(),
                           t) -
          segment_end_times.begin());
      curve.push_back(n == 0 ? 0.0 : cumulative[n - 1]);
    }
    budget.morpi_ds.push_back(std::move(curve));
  }
  return budget;
}

std::vector<double> default_time_grid() {
  std::vector<double> grid;
  grid.reserve(1501);
  for (int i = 0; i <= 1500; ++i) grid.push_back(0.01 * i);
  return grid;
}

void write_budget_log(std::ostream& out, const ErrorBudget& budget) {
  out.precision(12);
  out << "t,e3d,e2d";
  for (double dg : budget.morpi_dg)
    out << ",morpi_ds_" << std::lround(dg * 100.0) << "pct";
  out << '\n';
  for (std::size_t i = 0; i < budget.t.size(); ++i) {
    out << budget.t[i] << ',' << budget.e3d[i] << ',' << budget.e2d[i];
    for (const auto& curve : budget.morpi_ds) out << ',' << curve[i];
    out << '\n';
  }
}

MonteCarloReport monte_carlo_check(const TrajectorySpec& trajectory,
                                   const ErrorInputs& inputs, int trials,
                                   std::uint64_t seed,
                                   double accel_noise_density,
                                   double gyro_noise_density) {
  if (trials < 1) throw ConfigError("monte_carlo_check needs trials >= 1");

  TruthTrajectory truth = generate_truth(trajectory);
  ImuSequence ideal = imu_from_truth(truth, inputs.gravity);

  SensorSpec corruption;
  corruption.accel_bias = inputs.ba;
  corruption.gyro_bias = inputs.bg;
  corruption.accel_noise_density = accel_noise_density;
  corruption.gyro_noise_density = gyro_noise_density;
  corruption.gravity = inputs.gravity;

  std::size_t n = truth.t.size();
  MonteCarloReport report;
  report.trials = trials;
  report.t = truth.t;
  report.closed_3d.reserve(n);
  report.closed_2d.reserve(n);
  for (double t : truth.t) {
    report.closed_3d.push_back(ins_error_3d(t - truth.t.front(), inputs));
    report.closed_2d.push_back(ins_error_2d(t - truth.t.front(), inputs));
  }
  report.mean_3d.assign(n, 0.0);
  report.mean_2d.assign(n, 0.0);
  report.max_3d.assign(n, 0.0);
  report.min_3d.assign(n, std::numeric_limits<double>::infinity());

  for (int trial = 0; trial < trials; ++trial) {
    ImuSequence seq = corrupt(ideal, corruption, seed + static_cast<std::uint64_t>(trial));

    NavState init3;
    init3.v = inputs.dv0;  // truth starts at rest; dv0 is the velocity error
    NavSolution nav3 = mechanize_3d(seq, init3, inputs.gravity);

    PlanarState init2;
    init2.v = inputs.dv0.head<2>();
    NavSolution nav2 = mechanize_2d(seq, init2, inputs.gravity);

    for (std::size_t i = 0; i < n; ++i) {
      Vec2 truth_p(truth.x[i], truth.y[i]);
      double e3 = (nav3.states[i].p.head<2>() - truth_p).norm();
      double e2 = (nav2.states[i].p.head<2>() - truth_p).norm();
      report.mean_3d[i] += e3 / trials;
      report.mean_2d[i] += e2 / trials;
      report.max_3d[i] = std::max(report.max_3d[i], e3);
      report.min_3d[i] = std::min(report.min_3d[i], e3);
    }
  }
  return report;
}

}  // namespace morpi
