#include "morpi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>

#include "morpi/errors.hpp"
#include "morpi/signal.hpp"

namespace morpi {

MorpiMode morpi_mode_from_string(std::string_view name) {
  if (name == "a" || name == "A") return MorpiMode::A;
  if (name == "g" || name == "G") return MorpiMode::G;
  throw ConfigError("unknown MoRPI mode '" + std::string(name) +
                    "' (expected a or g)");
}

const char* to_string(MorpiMode mode) {
  return mode == MorpiMode::A ? "A" : "G";
}

std::vector<std::size_t> PeakSet::segment_boundaries() const {
  std::vector<std::size_t> b;
  b.reserve(indices.size() + 2);
  b.push_back(motion_start);
  b.insert(b.end(), indices.begin(), indices.end());
  b.push_back(motion_end - 1);
  return b;
}

std::vector<double> motion_signal(const ImuSequence& seq, MorpiMode mode) {
  std::vector<double> x;
  x.reserve(seq.size());
  for (const ImuSample& s : seq.samples)
    x.push_back(mode == MorpiMode::A ? s.f.y() : s.w.z());
  return x;
}

PeakSet detect_peaks(const ImuSequence& seq, MorpiMode mode,
                     const PeakConfig& cfg) {
  if (seq.size() < 3)
    throw ComputationError("sequence too short for peak detection");

  MotionBounds bounds =
      motion_bounds(seq, detect_stationary(seq, cfg.stationary));
  if (bounds.end - bounds.begin < 3)
    throw ComputationError("no moving portion found in the recording");

  std::vector<double> raw = motion_signal(seq, mode);
  std::vector<double> sliced(raw.begin() + static_cast<std::ptrdiff_t>(bounds.begin),
                             raw.begin() + static_cast<std::ptrdiff_t>(bounds.end));
  double rate = seq.rate_hz > 0.0 ? seq.rate_hz
                                  : ImuSequence::median_rate(seq.samples);
  std::vector<double> filtered =
      lowpass_zero_phase(sliced, cfg.lowpass_cutoff_hz, rate);

  double prominence =
      cfg.prominence_iqr_frac * interquartile_range(filtered);

  // first pass fixes the period estimate, second pass enforces separation
  std::vector<Peak> coarse = find_peaks(filtered, prominence, 0);
  std::size_t min_sep = 0;
  if (coarse.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < coarse.size(); ++i)
      gaps.push_back(static_cast<double>(coarse[i].index - coarse[i - 1].index));
    min_sep = static_cast<std::size_t>(
        std::lround(cfg.min_separation_frac * median(gaps)));
  }
  std::vector<Peak> peaks = find_peaks(filtered, prominence, min_sep);

  PeakSet out;
  out.signal_kind = mode;
  out.motion_start = bounds.begin;
  out.motion_end = bounds.end;
  for (const Peak& p : peaks) out.indices.push_back(bounds.begin + p.index);
  if (out.indices.empty())
    throw ComputationError(
        "insufficient periodicity: no interior peak detected");
  return out;
}

double range_quarter(const ImuSequence& seq, MorpiMode mode, std::size_t begin,
                     std::size_t end) {
  if (begin > end || end >= seq.size())
    throw ComputationError("segment range invalid");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = begin; i <= end; ++i) {
    double v = mode == MorpiMode::A ? seq.samples[i].f.y() : seq.samples[i].w.z();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::pow(hi - lo, 0.25);
}

double weinberg_distance(const ImuSequence& seq, std::size_t begin,
                         std::size_t end, const WeinbergGain& gain) {
  double df = range_quarter(seq, gain.mode, begin, end);
  if (df == 0.0) {
    std::cerr << "morpi: warning: degenerate segment [" << begin << ", " << end
              << "] has zero signal range\n";
    return 0.0;
  }
  return gain.value * df;
}

WeinbergGain estimate_gain(
    const std::vector<std::pair<ImuSequence, double>>& runs, MorpiMode mode,
    const PeakConfig& cfg) {
  if (runs.empty()) throw ConfigError("gain estimation needs at least one run");
  double sum = 0.0;
  int used = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& [seq, distance] = runs[r];
    if (!(distance > 0.0))
      throw ConfigError("training run " + std::to_string(r) +
                        " has non-positive known distance");
    double total_df = 0.0;
    try {
      PeakSet peaks = detect_peaks(seq, mode, cfg);
      auto b = peaks.segment_boundaries();
      for (std::size_t k = 0; k + 1 < b.size(); ++k)
        total_df += range_quarter(seq, mode, b[k], b[k + 1]);
    } catch (const ComputationError& e) {
      std::cerr << "morpi: warning: training run " << r << " skipped: "
                << e.what() << "\n";
      continue;
    }
    if (total_df <= 0.0) {
      std::cerr << "morpi: warning: training run " << r
                << " skipped: zero total signal range\n";
      continue;
    }
    sum += distance / total_df;
    ++used;
  }
  if (used == 0)
    throw ComputationError("no usable training run for gain estimation");
  return {sum / used, mode, used};
}

double segment_heading(const NavSolution& nav, const PeakSet& peaks,
                       std::size_t k) {
  if (k >= peaks.segment_count())
    throw ComputationError("segment index " + std::to_string(k) +
                           " out of range");
  std::size_t boundary = peaks.segment_boundaries()[k];
  if (boundary >= nav.yaw.size())
    throw ComputationError("navigation solution shorter than peak set");
  return nav.yaw[boundary] - nav.yaw.front();
}

MorpiTrack dead_reckon(const std::vector<double>& distances,
                       const std::vector<double>& headings,
                       const Vec2& origin) {
  if (distances.size() != headings.size())
    throw ConfigError("distances and headings must have equal length");
  MorpiTrack track;
  track.segment_distances = distances;
  track.headings = headings;
  track.positions.reserve(distances.size() + 1);
  track.positions.push_back(origin);
  Vec2 p = origin;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    p += distances[k] * Vec2(std::cos(headings[k]), std::sin(headings[k]));
    track.positions.push_back(p);
  }
  return track;
}

MorpiTrack run_morpi(const ImuSequence& seq, MorpiMode mode,
                     CalibMode calib_mode, const WeinbergGain& gain,
                     const PeakConfig& cfg) {
  if (gain.mode != mode)
    throw ConfigError(std::string("gain was trained for mode ") +
                      to_string(gain.mode) + " but mode " + to_string(mode) +
                      " was requested");
  if (!(gain.value > 0.0)) throw ConfigError("gain value must be positive");
  if (calib_mode == CalibMode::GAC)
    throw ConfigError("MoRPI uses RD or GC; the accelerometers are never "
                      "integrated, so GAC does not apply");

  ImuSequence cal = calibrated(seq, calib_mode, cfg.stationary);
  PeakSet peaks = detect_peaks(cal, mode, cfg);
  NavSolution nav = mechanize_3d(cal, {}, cfg.stationary.gravity);

  auto boundaries = peaks.segment_boundaries();
  std::vector<double> distances, headings;
  distances.reserve(peaks.segment_count());
  headings.reserve(peaks.segment_count());
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k) {
    distances.push_back(
        weinberg_distance(cal, boundaries[k], boundaries[k + 1], gain));
    headings.push_back(segment_heading(nav, peaks, k));
  }
  return dead_reckon(distances, headings);
}

EndpointError endpoint_error(const Vec2& estimate, const Vec2& truth,
                             double travelled_distance) {
  if (!(travelled_distance > 0.0))
    throw ConfigError("travelled distance must be positive");
  double e = (estimate - truth).norm();
  return {e, 100.0 * e / travelled_distance};
}

EndpointError endpoint_error(const MorpiTrack& track, const Vec2& truth,
                             double travelled_distance) {
  return endpoint_error(track.endpoint(), truth, travelled_distance);
}

EndpointError endpoint_error(const NavSolution& nav, const Vec2& truth,
                             double travelled_distance) {
  return endpoint_error(nav.travelled_endpoint(), truth, travelled_distance);
}

void save_gain(const std::filesystem::path& path, const WeinbergGain& gain,
               const std::string& manifest_hash) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write gain file '" + path.string() + "'");
  out.precision(17);
  out << "mode = " << to_string(gain.mode) << "\n"
      << "value = " << gain.value << "\n"
      << "training_runs = " << gain.training_runs << "\n";
  if (!manifest_hash.empty()) out << "manifest_hash = " << manifest_hash << "\n";
}

WeinbergGain load_gain(const std::filesystem::path& path,
                       std::string* manifest_hash) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gain file '" + path.string() + "'");
  WeinbergGain gain;
  bool have_mode = false, have_value = false;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    if (!(ls >> key >> eq) || eq != "=") continue;
    if (key == "mode") {
      std::string m;
      ls >> m;
      gain.mode = morpi_mode_from_string(m);
      have_mode = true;
    } else if (key == "value") {
      ls >> gain.value;
      have_value = true;
    } else if (key == "training_runs") {
      ls >> gain.training_runs;
    } else if (key == "manifest_hash" && manifest_hash) {
      ls >> *manifest_hash;
    }
  }
  if (!have_mode || !have_value)
    throw ParseError("gain file '" + path.string() +
                     "' misses mode or value");
  if (!(gain.value > 0.0))
    throw ParseError("gain file '" + path.string() + "' has non-positive value");
  return gain;
}

void write_track_log(std::ostream& out, const MorpiTrack& track) {
  out.precision(12);
  out << "k,s_k,dpsi_k,x_k,y_k\n";
  out << "0,0,0," << track.positions[0].x() << ',' << track.positions[0].y()
      << '\n';
  for (std::size_t k = 0; k < track.segment_distances.size(); ++k) {
    out << k + 1 << ',' << track.segment_distances[k] << ','
        << track.headings[k] << ',' << track.positions[k + 1].x() << ','
        << track.positions[k + 1].y() << '\n';
  }
}

}  // namespace morpi
