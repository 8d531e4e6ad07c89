#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "morpi/errmodel.hpp"
#include "morpi/errors.hpp"
#include "morpi/manifest.hpp"

namespace py = pybind11;
using namespace morpi;

namespace {

ImuSequence sequence_from_arrays(const Eigen::VectorXd& t,
                                 const Eigen::MatrixX3d& f,
                                 const Eigen::MatrixX3d& w, double rate_hz) {
  if (f.rows() != t.size() || w.rows() != t.size())
    throw ConfigError("t, f and w must have matching lengths");
  ImuSequence seq;
  seq.samples.resize(static_cast<std::size_t>(t.size()));
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    seq.samples[static_cast<std::size_t>(i)] = {t[i], f.row(i).transpose(),
                                                w.row(i).transpose()};
  }
  seq.rate_hz = rate_hz > 0.0 ? rate_hz : ImuSequence::median_rate(seq.samples);
  seq.validate();
  return seq;
}

Eigen::VectorXd times_of(const ImuSequence& seq) {
  Eigen::VectorXd t(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) t[i] = seq.samples[i].t;
  return t;
}

Eigen::MatrixX3d channel_of(const ImuSequence& seq, bool accel) {
  Eigen::MatrixX3d m(seq.size(), 3);
  for (std::size_t i = 0; i < seq.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) =
        (accel ? seq.samples[i].f : seq.samples[i].w).transpose();
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pure-inertial dead reckoning: strapdown INS and periodic-motion "
            "(MoRPI) estimators";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ParseError>(m, "ParseError");
  py::register_exception<StructuralError>(m, "StructuralError");
  py::register_exception<CalibrationError>(m, "CalibrationError");
  py::register_exception<ComputationError>(m, "ComputationError");

  // --- core types -----------------------------------------------------
  py::class_<ImuSequence>(m, "ImuSequence")
      .def(py::init(&sequence_from_arrays), py::arg("t"), py::arg("f"),
           py::arg("w"), py::arg("rate_hz") = 0.0,
           "Build a sequence from arrays: t [s], f (Nx3, m/s^2), w (Nx3, "
           "rad/s)")
      .def("__len__", &ImuSequence::size)
      .def_readonly("rate_hz", &ImuSequence::rate_hz)
      .def_property_readonly("t", &times_of)
      .def_property_readonly(
          "f", [](const ImuSequence& s) { return channel_of(s, true); })
      .def_property_readonly(
          "w", [](const ImuSequence& s) { return channel_of(s, false); })
      .def("duration", &ImuSequence::duration)
      .def("slice", &ImuSequence::slice, py::arg("begin"), py::arg("end"));

  py::class_<SensorSpec>(m, "SensorSpec")
      .def(py::init<>())
      .def_readwrite("accel_bias", &SensorSpec::accel_bias)
      .def_readwrite("gyro_bias", &SensorSpec::gyro_bias)
      .def_readwrite("accel_noise_density", &SensorSpec::accel_noise_density)
      .def_readwrite("gyro_noise_density", &SensorSpec::gyro_noise_density)
      .def_readwrite("gravity", &SensorSpec::gravity)
      .def_static("ideal", &SensorSpec::ideal)
      .def_static("mpu6500", &SensorSpec::mpu6500)
      .def_static("lsm6dsl", &SensorSpec::lsm6dsl)
      .def_static("by_name", &SensorSpec::by_name, py::arg("name"));

  // --- ingest ----------------------------------------------------------
  py::class_<FormatConfig>(m, "FormatConfig")
      .def(py::init<>())
      .def_readwrite("delimiter", &FormatConfig::delimiter)
      .def_readwrite("header_rows", &FormatConfig::header_rows)
      .def_readwrite("time_scale", &FormatConfig::time_scale)
      .def_readwrite("accel_scale", &FormatConfig::accel_scale)
      .def_readwrite("gyro_scale", &FormatConfig::gyro_scale)
      .def_readwrite("rebase_time", &FormatConfig::rebase_time)
      .def_readwrite("axis_permutation", &FormatConfig::axis_permutation);

  m.def("load_imu_file", &load_imu_file, py::arg("path"),
        py::arg("config") = FormatConfig{});
  m.def("save_imu_file", &save_imu_file, py::arg("path"), py::arg("sequence"));

  py::class_<StationaryWindow>(m, "StationaryWindow")
      .def_readonly("start_idx", &StationaryWindow::start_idx)
      .def_readonly("end_idx", &StationaryWindow::end_idx)
      .def_readonly("duration", &StationaryWindow::duration);

  m.def(
      "detect_stationary",
      [](const ImuSequence& seq) { return detect_stationary(seq); },
      py::arg("sequence"),
      "Maximal stationary windows (default thresholds)");

  // --- calibration -----------------------------------------------------
  py::enum_<CalibMode>(m, "CalibMode")
      .value("RD", CalibMode::RD)
      .value("GC", CalibMode::GC)
      .value("GAC", CalibMode::GAC);

  py::class_<CalibResult>(m, "CalibResult")
      .def_readonly("gyro_bias", &CalibResult::gyro_bias)
      .def_readonly("accel_bias", &CalibResult::accel_bias);

  m.def(
      "calibrate",
      [](const ImuSequence& seq, CalibMode mode) {
        return calibrate(seq, mode);
      },
      py::arg("sequence"), py::arg("mode"));
  m.def("apply_calibration", &apply_calibration, py::arg("sequence"),
        py::arg("calib"), py::arg("mode"));
  m.def(
      "calibrated",
      [](const ImuSequence& seq, CalibMode mode) {
        return calibrated(seq, mode);
      },
      py::arg("sequence"), py::arg("mode"),
      "calibrate() and apply_calibration() in one step");

  // --- strapdown ---------------------------------------------------------
  py::class_<NavSolution>(m, "NavSolution")
      .def_property_readonly(
          "t",
          [](const NavSolution& nav) {
            return Eigen::Map<const Eigen::VectorXd>(
                nav.t.data(), static_cast<Eigen::Index>(nav.t.size()));
          })
      .def_property_readonly(
          "positions",
          [](const NavSolution& nav) {
            Eigen::MatrixX3d p(nav.states.size(), 3);
            for (std::size_t i = 0; i < nav.states.size(); ++i)
              p.row(static_cast<Eigen::Index>(i)) = nav.states[i].p.transpose();
            return p;
          })
      .def_property_readonly(
          "velocities",
          [](const NavSolution& nav) {
            Eigen::MatrixX3d v(nav.states.size(), 3);
            for (std::size_t i = 0; i < nav.states.size(); ++i)
              v.row(static_cast<Eigen::Index>(i)) = nav.states[i].v.transpose();
            return v;
          })
      .def_property_readonly("yaw",
                             [](const NavSolution& nav) {
                               return Eigen::Map<const Eigen::VectorXd>(
                                   nav.yaw.data(),
                                   static_cast<Eigen::Index>(nav.yaw.size()));
                             })
      .def("travelled_endpoint", &NavSolution::travelled_endpoint);

  m.def(
      "mechanize_3d",
      [](const ImuSequence& seq, double gravity) {
        return mechanize_3d(seq, {}, gravity);
      },
      py::arg("sequence"), py::arg("gravity") = kDefaultGravity,
      "Full strapdown mechanization from rest at the origin");
  m.def(
      "mechanize_2d",
      [](const ImuSequence& seq, double gravity) {
        return mechanize_2d(seq, {}, gravity);
      },
      py::arg("sequence"), py::arg("gravity") = kDefaultGravity,
      "Planar (yaw-only) mechanization from rest at the origin");

  // --- MoRPI pipeline ----------------------------------------------------
  py::enum_<MorpiMode>(m, "MorpiMode")
      .value("A", MorpiMode::A)
      .value("G", MorpiMode::G);

  py::class_<PeakConfig>(m, "PeakConfig")
      .def(py::init<>())
      .def_readwrite("lowpass_cutoff_hz", &PeakConfig::lowpass_cutoff_hz)
      .def_readwrite("min_separation_frac", &PeakConfig::min_separation_frac)
      .def_readwrite("prominence_iqr_frac", &PeakConfig::prominence_iqr_frac);

  py::class_<PeakSet>(m, "PeakSet")
      .def_readonly("indices", &PeakSet::indices)
      .def_readonly("motion_start", &PeakSet::motion_start)
      .def_readonly("motion_end", &PeakSet::motion_end)
      .def("segment_boundaries", &PeakSet::segment_boundaries);

  py::class_<WeinbergGain>(m, "WeinbergGain")
      .def(py::init([](double value, MorpiMode mode) {
             return WeinbergGain{value, mode, 0};
           }),
           py::arg("value"), py::arg("mode"))
      .def_readonly("value", &WeinbergGain::value)
      .def_readonly("mode", &WeinbergGain::mode)
      .def_readonly("training_runs", &WeinbergGain::training_runs);

  py::class_<MorpiTrack>(m, "MorpiTrack")
      .def_property_readonly(
          "positions",
          [](const MorpiTrack& track) {
            Eigen::MatrixX2d p(track.positions.size(), 2);
            for (std::size_t i = 0; i < track.positions.size(); ++i)
              p.row(static_cast<Eigen::Index>(i)) =
                  track.positions[i].transpose();
            return p;
          })
      .def_readonly("segment_distances", &MorpiTrack::segment_distances)
      .def_readonly("headings", &MorpiTrack::headings)
      .def("endpoint", &MorpiTrack::endpoint);

  m.def("detect_peaks", &detect_peaks, py::arg("sequence"), py::arg("mode"),
        py::arg("config") = PeakConfig{});
  m.def("estimate_gain", &estimate_gain, py::arg("runs"), py::arg("mode"),
        py::arg("config") = PeakConfig{},
        "runs: list of (sequence, known_distance_m) pairs");
  m.def("run_morpi", &run_morpi, py::arg("sequence"), py::arg("mode"),
        py::arg("calib"), py::arg("gain"), py::arg("config") = PeakConfig{});
  m.def(
      "dead_reckon",
      [](const std::vector<double>& s, const std::vector<double>& psi) {
        return dead_reckon(s, psi);
      },
      py::arg("distances"), py::arg("headings"));
  m.def(
      "endpoint_error",
      [](const Vec2& estimate, const Vec2& truth, double distance) {
        EndpointError e = endpoint_error(estimate, truth, distance);
        return py::make_tuple(e.meters, e.percent);
      },
      py::arg("estimate"), py::arg("truth"), py::arg("travelled_distance"),
      "Returns (meters, percent of travelled distance)");
  m.def("save_gain", &save_gain, py::arg("path"), py::arg("gain"),
        py::arg("manifest_hash") = std::string{});
  m.def(
      "load_gain",
      [](const std::filesystem::path& path) { return load_gain(path); },
      py::arg("path"));

  // --- error model ---------------------------------------------------------
  py::class_<ErrorInputs>(m, "ErrorInputs")
      .def(py::init<>())
      .def_readwrite("dv0", &ErrorInputs::dv0)
      .def_readwrite("ba", &ErrorInputs::ba)
      .def_readwrite("bg", &ErrorInputs::bg)
      .def_readwrite("gravity", &ErrorInputs::gravity)
      .def_property_readonly("alpha", &ErrorInputs::alpha);

  m.def("system_matrix", &system_matrix, py::arg("f_n"), py::arg("C"));
  m.def("transition_matrix", &transition_matrix, py::arg("t"),
        py::arg("inputs"));
  m.def("ins_error_3d", &ins_error_3d, py::arg("t"), py::arg("inputs"));
  m.def("ins_error_2d", &ins_error_2d, py::arg("t"), py::arg("inputs"));
  m.def("morpi_error", &morpi_error, py::arg("dG_fraction"),
        py::arg("delta_f"), py::arg("gain_value"),
        "Cumulative peak-to-peak distance error per completed segment");

  py::class_<MonteCarloReport>(m, "MonteCarloReport")
      .def_readonly("t", &MonteCarloReport::t)
      .def_readonly("closed_3d", &MonteCarloReport::closed_3d)
      .def_readonly("closed_2d", &MonteCarloReport::closed_2d)
      .def_readonly("mean_3d", &MonteCarloReport::mean_3d)
      .def_readonly("mean_2d", &MonteCarloReport::mean_2d)
      .def_readonly("trials", &MonteCarloReport::trials);

  m.def("monte_carlo_check", &monte_carlo_check, py::arg("trajectory"),
        py::arg("inputs"), py::arg("trials"), py::arg("seed"),
        py::arg("accel_noise_density") = 0.0,
        py::arg("gyro_noise_density") = 0.0);

  // --- synthetic data ------------------------------------------------------
  py::enum_<TrajectoryShape>(m, "TrajectoryShape")
      .value("Straight", TrajectoryShape::Straight)
      .value("Sine", TrajectoryShape::Sine)
      .value("LShape", TrajectoryShape::LShape);

  py::class_<TrajectorySpec>(m, "TrajectorySpec")
      .def(py::init<>())
      .def_readwrite("shape", &TrajectorySpec::shape)
      .def_readwrite("length_m", &TrajectorySpec::length_m)
      .def_readwrite("leg2_m", &TrajectorySpec::leg2_m)
      .def_readwrite("turn_radius_m", &TrajectorySpec::turn_radius_m)
      .def_readwrite("amplitude_m", &TrajectorySpec::amplitude_m)
      .def_readwrite("period_m", &TrajectorySpec::period_m)
      .def_readwrite("envelope_periods", &TrajectorySpec::envelope_periods)
      .def_readwrite("speed_mps", &TrajectorySpec::speed_mps)
      .def_readwrite("ramp_s", &TrajectorySpec::ramp_s)
      .def_readwrite("head_stationary_s", &TrajectorySpec::head_stationary_s)
      .def_readwrite("tail_stationary_s", &TrajectorySpec::tail_stationary_s)
      .def_readwrite("rate_hz", &TrajectorySpec::rate_hz);

  py::class_<TruthTrajectory>(m, "TruthTrajectory")
      .def_readonly("t", &TruthTrajectory::t)
      .def_readonly("x", &TruthTrajectory::x)
      .def_readonly("y", &TruthTrajectory::y)
      .def_readonly("psi", &TruthTrajectory::psi)
      .def_readonly("path_length", &TruthTrajectory::path_length)
      .def("endpoint", &TruthTrajectory::endpoint);

  m.def("generate_truth", &generate_truth, py::arg("spec"));
  m.def("imu_from_truth", &imu_from_truth, py::arg("truth"),
        py::arg("gravity") = kDefaultGravity);
  m.def("corrupt", &corrupt, py::arg("sequence"), py::arg("spec"),
        py::arg("seed"));

  m.attr("DEFAULT_GRAVITY") = kDefaultGravity;
  m.attr("__version__") = "0.1.0";
}
