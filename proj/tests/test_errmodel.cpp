#include <doctest.h>

#include <cmath>
#include <sstream>

#include "morpi/errmodel.hpp"
#include "morpi/errors.hpp"
#include "morpi/strapdown.hpp"
#include "oracles.hpp"

using namespace morpi;

namespace {

ErrorInputs small_biases() {
  ErrorInputs in;
  in.ba = Vec3(0.06, 0.03, 0.0);
  in.bg = Vec3(0.002, 0.004, 0.0);
  return in;
}

TrajectorySpec straight_10s() {
  TrajectorySpec spec;
  spec.shape = TrajectoryShape::Straight;
  spec.length_m = 6.3;
  spec.speed_mps = 0.63;
  spec.head_stationary_s = 0.0;  // errors accumulate from t = 0
  spec.tail_stationary_s = 0.0;
  return spec;
}

}  // namespace

TEST_SUITE_BEGIN("errmodel");

TEST_CASE("system matrix wiring") {
  SUBCASE("zero specific force leaves only the kinematic couplings") {
    Mat15 F = system_matrix(Vec3::Zero(), Mat3::Identity());
    CHECK(F.block<3, 3>(0, 3).isIdentity(0.0));
    CHECK(F.block<3, 3>(3, 6).isZero(0.0));
    CHECK(F.block<3, 3>(3, 9).isIdentity(0.0));
    CHECK(F.block<3, 3>(6, 12).isIdentity(0.0));
    // bias rows are static
    CHECK(F.bottomRows<6>().isZero(0.0));
  }
  SUBCASE("specific-force block is skew") {
    Vec3 f(1.2, -0.7, 9.4);
    Mat15 F = system_matrix(f, Mat3::Identity());
    Mat3 blk = F.block<3, 3>(3, 6);
    CHECK((blk + blk.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(blk(0, 1) == f.z());
    CHECK(blk(1, 0) == -f.z());
  }
}

TEST_CASE("system matrix matches a finite-difference error Jacobian") {
  // one mechanization step from a perturbed state vs the nominal step:
  // column-by-column d(delta_state_dot)/d(delta_state)
  Vec3 f_b(0.4, -0.2, -9.81);
  Vec3 w_b(0.0, 0.0, 0.0);
  Mat3 C0 = Mat3::Identity();
  double g = 9.81;
  double dt = 1e-4, eps = 1e-6;

  auto step = [&](Vec3 p, Vec3 v, Vec3 epsilon, Vec3 ba, Vec3 bg) {
    // mechanize one step with misalignment epsilon and sensor biases
    Mat3 C = (Mat3::Identity() + skew(epsilon)) * C0;
    Vec3 f = f_b + ba;
    Vec3 w = w_b + bg;
    Mat3 C2 = propagate_attitude(C, w, dt);
    Vec3 a = C * f + gravity_nav(g);
    Vec3 v2 = v + a * dt;
    Vec3 p2 = p + v * dt;
    Eigen::Matrix<double, 9, 1> out;
    Vec3 eps2;
    Mat3 dC = C2 * C0.transpose() - Mat3::Identity();
    eps2 << dC(2, 1), dC(0, 2), dC(1, 0);
    out << p2, v2, eps2;
    return out;
  };

  Eigen::Matrix<double, 9, 1> nominal =
      step(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
  Mat15 F = system_matrix(f_b, C0);

  for (int col = 0; col < 15; ++col) {
    Eigen::Matrix<double, 15, 1> dx = Eigen::Matrix<double, 15, 1>::Zero();
    dx[col] = eps;
    Eigen::Matrix<double, 9, 1> pert =
        step(dx.segment<3>(0), dx.segment<3>(3), dx.segment<3>(6),
             dx.segment<3>(9), dx.segment<3>(12));
    Eigen::Matrix<double, 9, 1> rate = (pert - nominal) / (eps * dt);
    // subtract the transported initial perturbation (identity part)
    for (int row = 0; row < 9; ++row) {
      double direct = (row == col) ? 1.0 / dt : 0.0;
      double fd = rate[row] - direct;
      CHECK(fd == doctest::Approx(F(row, col)).epsilon(1e-4).scale(1.0));
    }
  }
}

TEST_CASE("transition matrix basics") {
  ErrorInputs in = small_biases();
  SUBCASE("identity at t = 0") {
    CHECK(transition_matrix(0.0, in).isIdentity(0.0));
  }
  SUBCASE("upper block-triangular with identity diagonal") {
    Mat15 phi = transition_matrix(2.5, in);
    for (int b = 0; b < 5; ++b)
      CHECK(phi.block<3, 3>(3 * b, 3 * b).isIdentity(0.0));
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < r; ++c)
        CHECK(phi.block<3, 3>(3 * r, 3 * c).isZero(0.0));
  }
  SUBCASE("semigroup property of the constant-coefficient solution") {
    for (double dt : {0.25, 1.0, 3.0}) {
      Mat15 once = transition_matrix(dt, in);
      Mat15 twice = transition_matrix(2.0 * dt, in);
      CHECK((once * once - twice).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("equals the nilpotent matrix exponential of F t") {
    Vec3 f_eff(in.ba.x(), in.ba.y(), in.ba.z() - in.gravity);
    Mat15 F = system_matrix(f_eff, Mat3::Identity());
    for (double t : {0.5, 2.0, 7.0}) {
      Mat15 expFt = Mat15::Identity() + F * t + (F * t) * (F * t) / 2.0 +
                    (F * t) * (F * t) * (F * t) / 6.0;
      CHECK((transition_matrix(t, in) - expFt).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("transition matrix position rows reproduce the error polynomials") {
  ErrorInputs in;
  in.dv0 = Vec3(0.05, -0.03, 0.01);
  in.ba = Vec3(0.06, -0.02, 0.09);
  in.bg = Vec3(0.003, -0.001, 0.002);
  double s = in.tilt_scale();

  Eigen::Matrix<double, 15, 1> x0 = Eigen::Matrix<double, 15, 1>::Zero();
  x0.segment<3>(3) = in.dv0;
  x0.segment<3>(9) = in.ba;
  x0.segment<3>(12) = in.bg;

  for (double t : {0.5, 2.0, 5.0, 9.0}) {
    Eigen::Matrix<double, 15, 1> xt = transition_matrix(t, in) * x0;
    // independent termwise expansion, b_gz terms included
    double dpx = in.dv0.x() * t + 0.5 * in.ba.x() * t * t -
                 (s * in.bg.y() + in.ba.y() * in.bg.z()) * t * t * t / 6.0;
    double dpy = in.dv0.y() * t + 0.5 * in.ba.y() * t * t +
                 (s * in.bg.x() + in.ba.x() * in.bg.z()) * t * t * t / 6.0;
    CHECK(xt[0] == doctest::Approx(dpx).epsilon(1e-12));
    CHECK(xt[1] == doctest::Approx(dpy).epsilon(1e-12));
    // velocity rows are the derivatives of the position rows
    double dvx = in.dv0.x() + in.ba.x() * t -
                 (s * in.bg.y() + in.ba.y() * in.bg.z()) * t * t / 2.0;
    CHECK(xt[3] == doctest::Approx(dvx).epsilon(1e-12));
  }
}

TEST_CASE("3D error curve closed form") {
  SUBCASE("zero inputs stay at zero") {
    ErrorInputs in;
    for (double t : {0.0, 1.0, 10.0}) CHECK(ins_error_3d(t, in) == 0.0);
  }
  SUBCASE("pure initial velocity error grows linearly") {
    ErrorInputs in;
    in.dv0 = Vec3(0.1, 0.0, 0.0);
    CHECK(ins_error_3d(5.0, in) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("negative time is rejected") {
    CHECK_THROWS_AS(ins_error_3d(-1.0, ErrorInputs{}), ComputationError);
  }
  SUBCASE("vertical channel inputs do not move the horizontal error") {
    ErrorInputs in;
    in.dv0 = Vec3(0.0, 0.0, 0.5);
    in.bg = Vec3(0.0, 0.0, 0.02);  // heading error is discarded
    CHECK(ins_error_3d(8.0, in) == 0.0);
  }
}

TEST_CASE("2D error curve closed form") {
  SUBCASE("constant bias follows the double-integration oracle") {
    ErrorInputs in;
    in.ba = Vec3(0.588, 0.0, 0.0);
    CHECK(ins_error_2d(5.0, in) ==
          doctest::Approx(oracles::double_integrated_bias(0.588, 5.0))
              .epsilon(1e-12));
    CHECK(ins_error_2d(5.0, in) == doctest::Approx(7.35).epsilon(1e-12));
  }
  SUBCASE("gyro and vertical terms are dropped") {
    ErrorInputs in;
    in.ba = Vec3(0.1, 0.05, 3.0);
    in.bg = Vec3(0.5, 0.5, 0.5);
    ErrorInputs planar;
    planar.ba = Vec3(0.1, 0.05, 0.0);
    CHECK(ins_error_2d(4.0, in) == ins_error_2d(4.0, planar));
  }
}

TEST_CASE("e2d never exceeds e3d for preset-style inputs") {
  // symmetric per-axis biases (the datasheet presets) plus symmetric initial
  // velocity errors: the cross terms cancel and the t^6 term dominates
  for (const SensorSpec& sensor :
       {SensorSpec::mpu6500(), SensorSpec::lsm6dsl()}) {
    for (double dv : {0.0, 0.1}) {
      ErrorInputs in;
      in.ba = sensor.accel_bias;
      in.bg = sensor.gyro_bias;
      in.dv0 = Vec3(dv, dv, 0.0);
      for (double t = 0.0; t <= 15.0; t += 0.01)
        CHECK(ins_error_2d(t, in) <= ins_error_3d(t, in) + 1e-12);
    }
  }
}

TEST_CASE("error curves grow monotonically for aligned inputs") {
  auto is_monotone = [](const ErrorInputs& in) {
    double prev3 = -1.0, prev2 = -1.0;
    for (double t = 0.0; t <= 15.0; t += 0.05) {
      double e3 = ins_error_3d(t, in), e2 = ins_error_2d(t, in);
      if (e3 < prev3 - 1e-12 || e2 < prev2 - 1e-12) return false;
      prev3 = e3;
      prev2 = e2;
    }
    return true;
  };
  ErrorInputs accel_only;
  accel_only.dv0 = Vec3(0.1, 0.2, 0.0);
  accel_only.ba = Vec3(0.3, 0.1, 0.0);
  CHECK(is_monotone(accel_only));
  ErrorInputs gyro_only;
  gyro_only.bg = Vec3(0.01, 0.02, 0.0);
  CHECK(is_monotone(gyro_only));
}

TEST_CASE("alpha is the printed derived scalar") {
  ErrorInputs in;
  in.ba = Vec3(0.0, 0.0, 0.25);
  in.gravity = 9.81;
  CHECK(in.alpha() == 9.81 + 0.25);
  CHECK(in.tilt_scale() == 9.81 - 0.25);
}

TEST_CASE("MoRPI cumulative error is linear in everything") {
  std::vector<double> df = {1.2, 1.2, 1.2, 1.2};
  SUBCASE("zero gain error means zero distance error") {
    for (double v : morpi_error(0.0, df, 0.6)) CHECK(v == 0.0);
  }
  SUBCASE("uniform segments grow linearly in N") {
    auto ds = morpi_error(0.1, df, 0.6);
    REQUIRE(ds.size() == 4);
    for (std::size_t k = 0; k < ds.size(); ++k)
      CHECK(ds[k] == doctest::Approx(0.1 * 0.6 * 1.2 * (k + 1)).epsilon(1e-12));
  }
  SUBCASE("linearity in the gain-error fraction and the gain") {
    std::vector<double> varied = {0.9, 1.4, 0.6};
    auto base = morpi_error(0.05, varied, 0.6);
    auto twice_dg = morpi_error(0.10, varied, 0.6);
    auto twice_gain = morpi_error(0.05, varied, 1.2);
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK(twice_dg[k] == doctest::Approx(2.0 * base[k]).epsilon(1e-12));
      CHECK(twice_gain[k] == doctest::Approx(2.0 * base[k]).epsilon(1e-12));
    }
  }
  SUBCASE("negative fraction is rejected") {
    CHECK_THROWS_AS(morpi_error(-0.1, df, 0.6), ComputationError);
  }
}

TEST_CASE("closed form matches the mechanized error within 1% over 10 s") {
  TrajectorySpec spec = straight_10s();
  // bias patterns in the linear regime, mixed signs and a vertical bias
  std::vector<ErrorInputs> cases;
  cases.push_back(small_biases());
  {
    ErrorInputs in;
    in.dv0 = Vec3(0.05, -0.02, 0.0);
    in.ba = Vec3(-0.04, 0.06, 0.0);
    in.bg = Vec3(-0.003, 0.002, 0.0);
    cases.push_back(in);
  }
  {
    ErrorInputs in;
    in.ba = Vec3(0.1, 0.0, 0.588);
    in.bg = Vec3(0.0, 0.005, 0.0);
    cases.push_back(in);
  }

  for (const ErrorInputs& in : cases) {
    MonteCarloReport r = monte_carlo_check(spec, in, 1, 1);
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      // 1% relative with a 1 mm floor where the curve passes through zero
      CHECK(std::abs(r.mean_3d[i] - r.closed_3d[i]) <=
            std::max(0.01 * r.closed_3d[i], 1e-3));
      CHECK(std::abs(r.mean_2d[i] - r.closed_2d[i]) <=
            std::max(0.01 * r.closed_2d[i], 1e-3));
    }
  }
}

TEST_CASE("noisy Monte Carlo mean sits above the noise-free closed form") {
  TrajectorySpec spec = straight_10s();
  ErrorInputs in = small_biases();
  SensorSpec noise = SensorSpec::mpu6500();
  MonteCarloReport r = monte_carlo_check(spec, in, 100, 77,
                                         noise.accel_noise_density,
                                         noise.gyro_noise_density);
  // the closed form excludes noise, so it lower-bounds the noisy mean and
  // lies inside the min/max spread late in the run
  std::size_t n = r.t.size();
  for (std::size_t i : {n / 2, 3 * n / 4, n - 1}) {
    CHECK(r.closed_3d[i] <= r.mean_3d[i]);
    CHECK(r.closed_3d[i] >= r.min_3d[i]);
    CHECK(r.closed_3d[i] <= r.max_3d[i]);
  }
  CHECK_THROWS_AS(monte_carlo_check(spec, in, 0, 1), ConfigError);
}

TEST_CASE("error budget assembles step curves on the time grid") {
  ErrorInputs in = small_biases();
  std::vector<double> grid = {0.0, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> df = {1.0, 1.0};
  std::vector<double> ends = {1.5, 3.5};
  ErrorBudget b = make_error_budget(in, grid, {0.05, 0.10}, df, ends, 0.6);

  REQUIRE(b.morpi_ds.size() == 2);
  CHECK(b.morpi_ds[0] == std::vector<double>{0.0, 0.0, 0.03, 0.03, 0.06});
  CHECK(b.morpi_ds[1] == std::vector<double>{0.0, 0.0, 0.06, 0.06, 0.12});
  CHECK(b.e3d[0] == 0.0);
  CHECK(b.e3d[4] == doctest::Approx(ins_error_3d(4.0, in)));

  std::ostringstream os;
  write_budget_log(os, b);
  CHECK(os.str().find("t,e3d,e2d,morpi_ds_5pct,morpi_ds_10pct") == 0);

  CHECK_THROWS_AS(make_error_budget(in, grid, {0.1}, df, {1.0}, 0.6),
                  ConfigError);
}

TEST_CASE("default time grid covers 15 s at 10 ms") {
  auto grid = default_time_grid();
  REQUIRE(grid.size() == 1501);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == doctest::Approx(15.0));
  CHECK(grid[1] - grid[0] == doctest::Approx(0.01));
}

TEST_SUITE_END();
