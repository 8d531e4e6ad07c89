#include "morpi/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "morpi/errors.hpp"

namespace morpi {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  if (delim == ' ' || delim == '\t') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) fields.push_back(line.substr(i, j - i));
      i = j;
    }
  } else {
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find(delim, start);
      fields.push_back(line.substr(start, pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }
  return fields;
}

double parse_number(std::string_view field, std::size_t line_no) {
  // tolerate surrounding spaces from hand-edited files
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
    field.remove_prefix(1);
  while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
    field.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse '" +
                     std::string(field) + "' as a number");
  return value;
}

void append_number(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

ImuSequence parse_imu_log(std::istream& source, const FormatConfig& cfg) {
  int max_col = cfg.col_t;
  for (int c : cfg.col_f) max_col = std::max(max_col, c);
  for (int c : cfg.col_w) max_col = std::max(max_col, c);

  ImuSequence seq;
  std::string line;
  std::size_t line_no = 0;
  int skip = cfg.header_rows;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip > 0) {
      --skip;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_fields(line, cfg.delimiter);
    if (static_cast<int>(fields.size()) <= max_col)
      throw ConfigError("line " + std::to_string(line_no) + ": found " +
                        std::to_string(fields.size()) +
                        " columns, column map needs at least " +
                        std::to_string(max_col + 1));
    ImuSample s;
    s.t = parse_number(fields[static_cast<std::size_t>(cfg.col_t)], line_no) *
          cfg.time_scale;
    Vec3 f, w;
    for (int a = 0; a < 3; ++a) {
      f[a] = parse_number(fields[static_cast<std::size_t>(cfg.col_f[a])], line_no) *
             cfg.accel_scale;
      w[a] = parse_number(fields[static_cast<std::size_t>(cfg.col_w[a])], line_no) *
             cfg.gyro_scale;
    }
    s.f = cfg.axis_permutation * f;
    s.w = cfg.axis_permutation * w;
    seq.samples.push_back(s);
  }
  if (seq.samples.empty()) throw StructuralError("no data rows in IMU log");
  if (cfg.rebase_time) {
    double t0 = seq.samples.front().t;
    for (auto& s : seq.samples) s.t -= t0;
  }
  for (std::size_t i = 1; i < seq.samples.size(); ++i)
    if (seq.samples[i].t <= seq.samples[i - 1].t)
      throw StructuralError("non-monotone timestamp at data row " +
                            std::to_string(i));
  seq.rate_hz = ImuSequence::median_rate(seq.samples);
  return seq;
}

ImuSequence load_imu_file(const std::filesystem::path& path,
                          const FormatConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open IMU log '" + path.string() + "'");
  ImuSequence seq = parse_imu_log(in, cfg);
  seq.meta["source"] = path.string();
  return seq;
}

void write_imu_log(std::ostream& out, const ImuSequence& seq) {
  out << "t,fx,fy,fz,wx,wy,wz\n";
  std::string line;
  for (const ImuSample& s : seq.samples) {
    line.clear();
    append_number(line, s.t);
    for (int a = 0; a < 3; ++a) {
      line.push_back(',');
      append_number(line, s.f[a]);
    }
    for (int a = 0; a < 3; ++a) {
      line.push_back(',');
      append_number(line, s.w[a]);
    }
    line.push_back('\n');
    out << line;
  }
}

void save_imu_file(const std::filesystem::path& path, const ImuSequence& seq) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write IMU log '" + path.string() + "'");
  write_imu_log(out, seq);
}

namespace {

/// Sliding standard deviation of x over a centered window of half-width h
/// (clamped at the edges), via prefix sums.
std::vector<double> sliding_std(const std::vector<double>& x, std::size_t h) {
  std::size_t n = x.size();
  std::vector<double> sum(n + 1, 0.0), sum2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i + 1] = sum[i] + x[i];
    sum2[i + 1] = sum2[i] + x[i] * x[i];
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i > h ? i - h : 0;
    std::size_t hi = std::min(n, i + h + 1);
    double m = static_cast<double>(hi - lo);
    double mean = (sum[hi] - sum[lo]) / m;
    double var = (sum2[hi] - sum2[lo]) / m - mean * mean;
    out[i] = std::sqrt(std::max(0.0, var));
  }
  return out;
}

}  // namespace

std::vector<StationaryWindow> detect_stationary(const ImuSequence& seq,
                                                const StationaryConfig& cfg) {
  if (seq.empty()) throw StructuralError("cannot scan an empty sequence");
  std::size_t n = seq.size();
  std::vector<double> gyro_norm(n), accel_res(n);
  for (std::size_t i = 0; i < n; ++i) {
    gyro_norm[i] = seq.samples[i].w.norm();
    accel_res[i] = seq.samples[i].f.norm() - cfg.gravity;
  }
  double rate = seq.rate_hz > 0.0 ? seq.rate_hz
                                  : ImuSequence::median_rate(seq.samples);
  std::size_t h = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(0.5 * cfg.window_s * rate)));
  std::vector<double> gstd = sliding_std(gyro_norm, h);
  std::vector<double> astd = sliding_std(accel_res, h);

  std::vector<StationaryWindow> windows;
  std::size_t run_start = 0;
  bool in_run = false;
  auto close_run = [&](std::size_t end) {
    if (!in_run) return;
    in_run = false;
    double duration = seq.samples[end - 1].t - seq.samples[run_start].t;
    if (duration >= cfg.min_duration_s)
      windows.push_back({run_start, end, duration});
  };
  for (std::size_t i = 0; i < n; ++i) {
    bool still = gstd[i] < cfg.gyro_std_max && astd[i] < cfg.accel_std_max;
    if (still && !in_run) {
      in_run = true;
      run_start = i;
    } else if (!still) {
      close_run(i);
    }
  }
  close_run(n);
  return windows;
}

MotionBounds motion_bounds(const ImuSequence& seq,
                           const std::vector<StationaryWindow>& windows) {
  MotionBounds b{0, seq.size()};
  if (windows.empty()) return b;
  const StationaryWindow& head = windows.front();
  const StationaryWindow& tail = windows.back();
  bool has_head = head.start_idx == 0;
  bool has_tail = tail.end_idx == seq.size() && !(has_head && windows.size() == 1);
  if (has_head) b.begin = head.end_idx;
  if (has_tail) b.end = tail.start_idx;
  if (b.begin > b.end) b.end = b.begin;  // fully stationary recording
  return b;
}

}  // namespace morpi
