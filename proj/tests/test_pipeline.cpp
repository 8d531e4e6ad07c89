#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "morpi/errors.hpp"
#include "morpi/pipeline.hpp"
#include "morpi/simgen.hpp"

using namespace morpi;
using std::numbers::pi;

namespace {

TrajectorySpec sine_spec(double speed, double amplitude = 0.1) {
  TrajectorySpec s;
  s.shape = TrajectoryShape::Sine;
  s.length_m = 6.3;
  s.amplitude_m = amplitude;
  s.period_m = 1.0;
  s.speed_mps = speed;
  return s;
}

/// Stationary head/tail with a synthetic oscillation in between; the chosen
/// channel carries `cycles` full sine periods of the given amplitude.
ImuSequence synthetic_periodic(MorpiMode mode, int cycles, double amplitude,
                               double period_s = 1.0, double rate = 100.0) {
  ImuSequence seq;
  double head = 2.0, motion = cycles * period_s, tail = 2.0;
  auto n = static_cast<std::size_t>((head + motion + tail) * rate) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / rate;
    ImuSample s;
    s.t = t;
    s.f = stationary_specific_force();
    if (t > head && t < head + motion) {
      double osc = amplitude * std::sin(2.0 * pi * (t - head) / period_s);
      if (mode == MorpiMode::A)
        s.f.y() += osc;
      else
        s.w.z() += osc;
    }
    seq.samples.push_back(s);
  }
  seq.rate_hz = rate;
  return seq;
}

ImuSequence ideal_sine_imu(double speed, double amplitude = 0.1) {
  return imu_from_truth(generate_truth(sine_spec(speed, amplitude)));
}

double interval_cv(const PeakSet& p) {
  std::vector<double> gaps;
  for (std::size_t i = 1; i < p.indices.size(); ++i)
    gaps.push_back(static_cast<double>(p.indices[i] - p.indices[i - 1]));
  if (gaps.size() < 2) return 0.0;
  double m = 0.0, v = 0.0;
  for (double g : gaps) m += g;
  m /= static_cast<double>(gaps.size());
  for (double g : gaps) v += (g - m) * (g - m);
  v /= static_cast<double>(gaps.size());
  return std::sqrt(v) / m;
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("six sine cycles on gyro-z give six interior peaks") {
  ImuSequence seq = synthetic_periodic(MorpiMode::G, 6, 0.8);
  PeakSet p = detect_peaks(seq, MorpiMode::G);
  CHECK(p.indices.size() == 6);
  CHECK(p.signal_kind == MorpiMode::G);
  for (std::size_t idx : p.indices) {
    CHECK(idx >= p.motion_start);
    CHECK(idx < p.motion_end);
  }
  // boundaries = start, peaks, end
  CHECK(p.segment_boundaries().size() == 8);
  CHECK(p.segment_count() == 7);
}

TEST_CASE("six sine cycles on accel-y, mode A") {
  ImuSequence seq = synthetic_periodic(MorpiMode::A, 6, 6.0);
  PeakSet p = detect_peaks(seq, MorpiMode::A);
  CHECK(p.indices.size() == 6);
}

TEST_CASE("constant signal has insufficient periodicity") {
  ImuSequence seq = synthetic_periodic(MorpiMode::G, 6, 0.0);
  CHECK_THROWS_AS(detect_peaks(seq, MorpiMode::G), ComputationError);
}

TEST_CASE("gyro peaks are steadier than accel peaks at small amplitude") {
  // narrow-corridor conditions: 5 cm amplitude at 0.3 m/s, consumer noise
  ImuSequence ideal = ideal_sine_imu(0.3, 0.05);
  SensorSpec noise = SensorSpec::mpu6500();
  noise.accel_bias.setZero();
  noise.gyro_bias.setZero();
  double cv_a = 0.0, cv_g = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ImuSequence noisy = corrupt(ideal, noise, seed);
    cv_a += interval_cv(detect_peaks(noisy, MorpiMode::A));
    cv_g += interval_cv(detect_peaks(noisy, MorpiMode::G));
  }
  CHECK(cv_g < cv_a);
}

TEST_CASE("weinberg distance is gain times the quarter root of the range") {
  ImuSequence seq;
  for (int i = 0; i < 32; ++i) {
    ImuSample s;
    s.t = 0.01 * i;
    s.f = stationary_specific_force();
    // f_y sweeps 16 units peak to peak
    s.f.y() = 8.0 * std::sin(2.0 * pi * i / 32.0);
    s.w.z() = 0.5 * std::sin(2.0 * pi * i / 32.0);  // range 1
    seq.samples.push_back(s);
  }
  seq.rate_hz = 100.0;

  CHECK(weinberg_distance(seq, 0, 31, {1.0, MorpiMode::A, 1}) ==
        doctest::Approx(2.0));  // 16^(1/4)
  CHECK(weinberg_distance(seq, 0, 31, {0.5, MorpiMode::G, 1}) ==
        doctest::Approx(0.5));  // 0.5 * 1^(1/4)
}

TEST_CASE("degenerate segment yields zero distance") {
  ImuSequence seq;
  for (int i = 0; i < 10; ++i)
    seq.samples.push_back({0.01 * i, stationary_specific_force(), Vec3::Zero()});
  seq.rate_hz = 100.0;
  CHECK(weinberg_distance(seq, 0, 9, {1.0, MorpiMode::A, 1}) == 0.0);
}

TEST_CASE("bias on the motion channel cancels out of the range") {
  ImuSequence seq = synthetic_periodic(MorpiMode::G, 4, 0.8);
  ImuSequence biased = seq;
  for (ImuSample& s : biased.samples) {
    s.w.z() += 0.37;
    s.f.y() += 1.23;
  }
  for (MorpiMode mode : {MorpiMode::A, MorpiMode::G}) {
    double a = range_quarter(seq, mode, 150, 450);
    double b = range_quarter(biased, mode, 150, 450);
    CHECK(a == b);
  }
}

TEST_CASE("gain estimation inverts the Weinberg formula") {
  // one run, two segments of equal range 16: sum of quarter roots is 4
  ImuSequence seq = synthetic_periodic(MorpiMode::A, 1, 8.0, 4.0);
  SUBCASE("single run") {
    WeinbergGain g = estimate_gain({{seq, 2.0}}, MorpiMode::A);
    PeakSet p = detect_peaks(seq, MorpiMode::A);
    auto b = p.segment_boundaries();
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < b.size(); ++k)
      total += range_quarter(seq, MorpiMode::A, b[k], b[k + 1]);
    CHECK(g.value == doctest::Approx(2.0 / total).epsilon(1e-12));
    CHECK(g.training_runs == 1);

    // closure: applying the gain to the training run returns its distance
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < b.size(); ++k)
      sum += weinberg_distance(seq, b[k], b[k + 1], g);
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("two runs average their per-run gains") {
    WeinbergGain g1 = estimate_gain({{seq, 2.0}}, MorpiMode::A);
    WeinbergGain g2 = estimate_gain({{seq, 4.0}}, MorpiMode::A);
    CHECK(g2.value == doctest::Approx(2.0 * g1.value));
    WeinbergGain both = estimate_gain({{seq, 2.0}, {seq, 4.0}}, MorpiMode::A);
    CHECK(both.value ==
          doctest::Approx(0.5 * (g1.value + g2.value)).epsilon(1e-12));
    CHECK(both.training_runs == 2);
  }
}

TEST_CASE("all-degenerate training set is an error") {
  ImuSequence flat = synthetic_periodic(MorpiMode::G, 6, 0.0);
  CHECK_THROWS_AS(estimate_gain({{flat, 2.0}}, MorpiMode::G),
                  ComputationError);
  CHECK_THROWS_AS(estimate_gain({{flat, -1.0}}, MorpiMode::G), ConfigError);
  CHECK_THROWS_AS(estimate_gain({}, MorpiMode::G), ConfigError);
}

TEST_CASE("segment heading integrates the gyro") {
  // constant w_z = 0.1 rad/s from t = 0
  ImuSequence seq;
  for (int i = 0; i <= 600; ++i) {
    ImuSample s;
    s.t = 0.01 * i;
    s.f = stationary_specific_force();
    s.w = Vec3(0.0, 0.0, 0.1);
    seq.samples.push_back(s);
  }
  seq.rate_hz = 100.0;
  NavSolution nav = mechanize_3d(seq);

  PeakSet peaks;
  peaks.indices = {200, 400};  // boundary at t = 2 s and t = 4 s
  peaks.motion_start = 0;
  peaks.motion_end = seq.size();

  CHECK(segment_heading(nav, peaks, 0) == 0.0);  // starts at the origin
  CHECK(segment_heading(nav, peaks, 1) == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(segment_heading(nav, peaks, 2) == doctest::Approx(0.4).epsilon(1e-6));
  CHECK_THROWS_AS(segment_heading(nav, peaks, 3), ComputationError);
}

TEST_CASE("zero gyro input keeps all headings at zero") {
  ImuSequence seq = synthetic_periodic(MorpiMode::A, 5, 6.0);
  WeinbergGain g = estimate_gain({{seq, 6.3}}, MorpiMode::A);
  MorpiTrack track = run_morpi(seq, MorpiMode::A, CalibMode::RD, g);
  for (double h : track.headings) CHECK(h == 0.0);
  CHECK(track.endpoint().y() == 0.0);
}

TEST_CASE("dead reckoning composes headings and distances") {
  SUBCASE("straight east") {
    MorpiTrack t = dead_reckon({1, 1, 1}, {0, 0, 0});
    CHECK(t.endpoint() == Vec2(3, 0));
  }
  SUBCASE("turn north") {
    MorpiTrack t = dead_reckon({1, 1}, {pi / 2, pi / 2});
    CHECK(t.endpoint().x() == doctest::Approx(0.0));
    CHECK(t.endpoint().y() == doctest::Approx(2.0));
  }
  SUBCASE("out and back") {
    MorpiTrack t = dead_reckon({1, 1}, {0, pi});
    CHECK(t.endpoint().norm() < 1e-15);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(dead_reckon({1, 2}, {0}), ConfigError);
  }
}

TEST_CASE("track positions step by exactly the segment distances") {
  MorpiTrack t = dead_reckon({0.5, 1.5, 0.7, 2.0}, {0.1, -0.4, 1.2, 2.9},
                             Vec2(3.0, -1.0));
  REQUIRE(t.positions.size() == t.segment_distances.size() + 1);
  CHECK(t.positions.front() == Vec2(3.0, -1.0));
  for (std::size_t k = 0; k < t.segment_distances.size(); ++k) {
    double step = (t.positions[k + 1] - t.positions[k]).norm();
    CHECK(std::abs(step - t.segment_distances[k]) < 1e-12);
  }
  // triangle inequality: the polyline is at least as long as the chord
  double total = 0.0;
  for (double s : t.segment_distances) total += s;
  CHECK(total >= (t.endpoint() - t.positions.front()).norm());
}

TEST_CASE("gain scale equivariance") {
  ImuSequence seq = ideal_sine_imu(0.6);
  WeinbergGain g = estimate_gain({{seq, 6.3}}, MorpiMode::G);
  WeinbergGain g2{g.value * 3.0, g.mode, g.training_runs};
  MorpiTrack a = run_morpi(seq, MorpiMode::G, CalibMode::RD, g);
  MorpiTrack b = run_morpi(seq, MorpiMode::G, CalibMode::RD, g2);
  REQUIRE(a.segment_distances.size() == b.segment_distances.size());
  for (std::size_t k = 0; k < a.segment_distances.size(); ++k) {
    CHECK(b.segment_distances[k] ==
          doctest::Approx(3.0 * a.segment_distances[k]).epsilon(1e-12));
    CHECK(b.headings[k] == a.headings[k]);
  }
  CHECK((b.endpoint() - 3.0 * a.endpoint()).norm() < 1e-12);
}

TEST_CASE("closure: training on a run reproduces its distance") {
  ImuSequence seq = ideal_sine_imu(0.5);
  for (MorpiMode mode : {MorpiMode::A, MorpiMode::G}) {
    WeinbergGain g = estimate_gain({{seq, 6.3}}, mode);
    MorpiTrack track = run_morpi(seq, mode, CalibMode::RD, g);
    double sum = 0.0;
    for (double s : track.segment_distances) sum += s;
    CHECK(sum == doctest::Approx(6.3).epsilon(1e-9));
  }
}

TEST_CASE("ideal periodic run lands within 1% of the endpoint") {
  TrajectorySpec spec = sine_spec(0.6);
  TruthTrajectory truth = generate_truth(spec);
  ImuSequence seq = imu_from_truth(truth);
  for (MorpiMode mode : {MorpiMode::A, MorpiMode::G}) {
    WeinbergGain g = estimate_gain({{seq, 6.3}}, mode);
    MorpiTrack track = run_morpi(seq, mode, CalibMode::RD, g);
    EndpointError e = endpoint_error(track, truth.endpoint(), 6.3);
    CHECK(e.percent < 1.0);
  }
}

TEST_CASE("mode and calibration guards") {
  ImuSequence seq = ideal_sine_imu(0.6);
  WeinbergGain g_a{0.7, MorpiMode::A, 1};
  CHECK_THROWS_AS(run_morpi(seq, MorpiMode::G, CalibMode::RD, g_a),
                  ConfigError);
  WeinbergGain g_g{0.6, MorpiMode::G, 1};
  CHECK_THROWS_AS(run_morpi(seq, MorpiMode::G, CalibMode::GAC, g_g),
                  ConfigError);
  WeinbergGain bad{0.0, MorpiMode::G, 1};
  CHECK_THROWS_AS(run_morpi(seq, MorpiMode::G, CalibMode::RD, bad),
                  ConfigError);
}

TEST_CASE("endpoint error in meters and percent") {
  EndpointError zero = endpoint_error(Vec2(6.3, 0.0), Vec2(6.3, 0.0), 6.3);
  CHECK(zero.meters == 0.0);
  CHECK(zero.percent == 0.0);

  EndpointError e = endpoint_error(Vec2(6.3, 1.8), Vec2(6.3, 0.0), 6.3);
  CHECK(e.meters == doctest::Approx(1.8));
  CHECK(e.percent == doctest::Approx(28.571428).epsilon(1e-6));

  EndpointError f = endpoint_error(Vec2(0.0, 3.0), Vec2(0.0, 0.0), 10.0);
  CHECK(f.meters == doctest::Approx(3.0));
  CHECK(f.percent == doctest::Approx(30.0));

  CHECK_THROWS_AS(endpoint_error(Vec2(1, 1), Vec2(0, 0), 0.0), ConfigError);
}

TEST_CASE("gain file round trip and hash passthrough") {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "morpi_gain.txt";
  WeinbergGain g{0.57351234567890123, MorpiMode::G, 12};
  save_gain(tmp, g, "deadbeef01234567");
  std::string hash;
  WeinbergGain back = load_gain(tmp, &hash);
  fs::remove(tmp);
  CHECK(back.value == g.value);
  CHECK(back.mode == MorpiMode::G);
  CHECK(back.training_runs == 12);
  CHECK(hash == "deadbeef01234567");
}

TEST_SUITE_END();
