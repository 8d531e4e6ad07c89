#include "morpi/calib.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "morpi/errors.hpp"

namespace morpi {

namespace {

constexpr double kGyroBiasSanity = 0.5;  // [rad/s]
constexpr double kAccelBiasSanity = 2.0;  // [m/s^2]

void check_window(const ImuSequence& seq, const StationaryWindow& win,
                  double min_duration_s) {
  if (win.start_idx >= win.end_idx || win.end_idx > seq.size())
    throw CalibrationError("stationary window indices invalid for sequence");
  double duration =
      seq.samples[win.end_idx - 1].t - seq.samples[win.start_idx].t;
  if (duration < min_duration_s)
    throw CalibrationError("stationary window of " + std::to_string(duration) +
                           " s is shorter than the required " +
                           std::to_string(min_duration_s) + " s");
}

Vec3 window_mean(const ImuSequence& seq, const StationaryWindow& win,
                 bool accel) {
  // Kahan summation: windows span thousands of samples
  Vec3 sum = Vec3::Zero(), carry = Vec3::Zero();
  for (std::size_t i = win.start_idx; i < win.end_idx; ++i) {
    Vec3 v = (accel ? seq.samples[i].f : seq.samples[i].w) - carry;
    Vec3 next = sum + v;
    carry = (next - sum) - v;
    sum = next;
  }
  return sum / static_cast<double>(win.end_idx - win.start_idx);
}

}  // namespace

CalibMode calib_mode_from_string(std::string_view name) {
  if (name == "rd" || name == "RD") return CalibMode::RD;
  if (name == "gc" || name == "GC") return CalibMode::GC;
  if (name == "gac" || name == "GAC") return CalibMode::GAC;
  throw ConfigError("unknown calibration mode '" + std::string(name) +
                    "' (expected rd, gc or gac)");
}

const char* to_string(CalibMode mode) {
  switch (mode) {
    case CalibMode::RD: return "RD";
    case CalibMode::GC: return "GC";
    case CalibMode::GAC: return "GAC";
  }
  return "?";
}

Vec3 estimate_gyro_bias(const ImuSequence& seq, const StationaryWindow& win,
                        double min_duration_s) {
  check_window(seq, win, min_duration_s);
  return window_mean(seq, win, false);
}

Vec3 estimate_accel_bias(const ImuSequence& seq, const StationaryWindow& win,
                         double gravity, double min_duration_s) {
  check_window(seq, win, min_duration_s);
  return window_mean(seq, win, true) - stationary_specific_force(gravity);
}

CalibResult calibrate(const ImuSequence& seq, CalibMode mode,
                      const StationaryConfig& cfg, double calib_window_s) {
  CalibResult result;
  if (mode == CalibMode::RD) return result;

  auto windows = detect_stationary(seq, cfg);
  if (windows.empty())
    throw CalibrationError("no stationary window found for calibration");
  StationaryWindow win = windows.front();

  // truncate to the first calib_window_s seconds of the head window
  double t_limit = seq.samples[win.start_idx].t + calib_window_s;
  std::size_t end = win.start_idx;
  while (end < win.end_idx && seq.samples[end].t <= t_limit) ++end;
  win.end_idx = end;
  win.duration = seq.samples[win.end_idx - 1].t - seq.samples[win.start_idx].t;

  result.source_window = win;
  result.gyro_bias = estimate_gyro_bias(seq, win, cfg.min_duration_s);
  if (result.gyro_bias.cwiseAbs().maxCoeff() >= kGyroBiasSanity)
    throw CalibrationError("estimated gyro bias exceeds 0.5 rad/s; window is "
                           "not stationary");
  if (mode == CalibMode::GAC) {
    Vec3 ba = estimate_accel_bias(seq, win, cfg.gravity, cfg.min_duration_s);
    if (ba.cwiseAbs().maxCoeff() >= kAccelBiasSanity)
      throw CalibrationError("estimated accel bias exceeds 2 m/s^2; window is "
                             "not stationary or not level");
    result.accel_bias = ba;
  }
  return result;
}

ImuSequence apply_calibration(const ImuSequence& seq, const CalibResult& calib,
                              CalibMode mode) {
  if (mode == CalibMode::RD) return seq;
  ImuSequence out = seq;
  for (ImuSample& s : out.samples) {
    s.w -= calib.gyro_bias;
    if (mode == CalibMode::GAC && calib.accel_bias) s.f -= *calib.accel_bias;
  }
  if (mode == CalibMode::GAC && !calib.accel_bias)
    throw ConfigError("GAC requested but CalibResult has no accel bias");
  return out;
}

ImuSequence calibrated(const ImuSequence& seq, CalibMode mode,
                       const StationaryConfig& cfg) {
  return apply_calibration(seq, calibrate(seq, mode, cfg), mode);
}

void save_calib(const std::filesystem::path& path, const CalibResult& calib) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write calibration '" + path.string() + "'");
  out.precision(17);
  out << "gyro_bias_x = " << calib.gyro_bias.x() << "\n"
      << "gyro_bias_y = " << calib.gyro_bias.y() << "\n"
      << "gyro_bias_z = " << calib.gyro_bias.z() << "\n";
  if (calib.accel_bias) {
    out << "accel_bias_x = " << calib.accel_bias->x() << "\n"
        << "accel_bias_y = " << calib.accel_bias->y() << "\n"
        << "accel_bias_z = " << calib.accel_bias->z() << "\n";
  }
  out << "window_start = " << calib.source_window.start_idx << "\n"
      << "window_end = " << calib.source_window.end_idx << "\n"
      << "window_duration = " << calib.source_window.duration << "\n";
}

CalibResult load_calib(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration '" + path.string() + "'");
  std::map<std::string, double> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'key = value'");
    std::string key = line.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    try {
      kv[key] = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad number");
    }
  }
  auto need = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end())
      throw ParseError("calibration file misses key '" + key + "'");
    return it->second;
  };
  CalibResult c;
  c.gyro_bias << need("gyro_bias_x"), need("gyro_bias_y"), need("gyro_bias_z");
  if (kv.count("accel_bias_x")) {
    Vec3 ba;
    ba << need("accel_bias_x"), need("accel_bias_y"), need("accel_bias_z");
    c.accel_bias = ba;
  }
  c.source_window.start_idx = static_cast<std::size_t>(need("window_start"));
  c.source_window.end_idx = static_cast<std::size_t>(need("window_end"));
  c.source_window.duration = need("window_duration");
  if (c.gyro_bias.cwiseAbs().maxCoeff() >= kGyroBiasSanity ||
      (c.accel_bias && c.accel_bias->cwiseAbs().maxCoeff() >= kAccelBiasSanity))
    throw CalibrationError("loaded calibration exceeds plausibility bounds");
  return c;
}

}  // namespace morpi
