#pragma once

#include <filesystem>
#include <iosfwd>
#include <utility>
#include <vector>

#include "morpi/calib.hpp"
#include "morpi/ingest.hpp"
#include "morpi/strapdown.hpp"
#include "morpi/types.hpp"

namespace morpi {

/// Which inertial channel drives the peak-to-peak estimation:
/// A uses the y-axis accelerometer, G the z-axis gyroscope.
enum class MorpiMode { A, G };

MorpiMode morpi_mode_from_string(std::string_view name);
const char* to_string(MorpiMode mode);

struct PeakConfig {
  double lowpass_cutoff_hz = 5.0;
  /// Minimum peak separation as a fraction of the median period estimate.
  double min_separation_frac = 0.3;
  /// Prominence threshold as a fraction of the filtered signal's IQR.
  double prominence_iqr_frac = 0.2;
  StationaryConfig stationary{};
};

/// Interior local maxima of the motion signal plus the bounds of the moving
/// portion. Segment boundaries are start-of-motion, the peaks, and
/// end-of-motion.
struct PeakSet {
  std::vector<std::size_t> indices;
  MorpiMode signal_kind = MorpiMode::G;
  std::size_t motion_start = 0;
  std::size_t motion_end = 0;  // exclusive

  std::size_t segment_count() const { return indices.size() + 1; }
  /// indices.size() + 2 boundary samples: motion_start, peaks, motion_end-1.
  std::vector<std::size_t> segment_boundaries() const;
};

/// Empirical peak-to-peak gain. Units: m per (m/s^2)^(1/4) for mode A,
/// m per (rad/s)^(1/4) for mode G.
struct WeinbergGain {
  double value = 0.0;
  MorpiMode mode = MorpiMode::G;
  int training_runs = 0;
};

/// Dead-reckoned planar track. positions has one more entry than
/// segment_distances; |positions[k+1]-positions[k]| == segment_distances[k].
struct MorpiTrack {
  std::vector<Vec2> positions;
  std::vector<double> segment_distances;
  std::vector<double> headings;

  Vec2 endpoint() const {
    return positions.empty() ? Vec2::Zero() : positions.back();
  }
};

/// Extracts the motion signal (f_y or w_z) of the chosen mode.
std::vector<double> motion_signal(const ImuSequence& seq, MorpiMode mode);

/// Finds the peaks of the low-pass-filtered motion signal between the head
/// and tail stationary windows. Throws ComputationError when fewer than one
/// interior peak survives.
PeakSet detect_peaks(const ImuSequence& seq, MorpiMode mode,
                     const PeakConfig& cfg = {});

/// (max - min)^(1/4) of the motion signal over samples [begin, end].
double range_quarter(const ImuSequence& seq, MorpiMode mode, std::size_t begin,
                     std::size_t end);

/// Weinberg peak-to-peak distance: gain * (max - min)^(1/4) over the
/// segment. A degenerate (constant) segment yields 0.
double weinberg_distance(const ImuSequence& seq, std::size_t begin,
                         std::size_t end, const WeinbergGain& gain);

/// Inverts the Weinberg formula on training runs with known travelled
/// distance: per run G = distance / sum_k (max-min)^(1/4); the result is the
/// mean over runs. Runs without usable periodicity are skipped with a
/// warning; an empty usable set is an error.
WeinbergGain estimate_gain(
    const std::vector<std::pair<ImuSequence, double>>& runs, MorpiMode mode,
    const PeakConfig& cfg = {});

/// Yaw at the k-th segment's starting boundary relative to the initial yaw.
double segment_heading(const NavSolution& nav, const PeakSet& peaks,
                       std::size_t k);

/// Cumulative position update x_{k+1} = x_k + s_k cos(dpsi_k),
/// y_{k+1} = y_k + s_k sin(dpsi_k).
MorpiTrack dead_reckon(const std::vector<double>& distances,
                       const std::vector<double>& headings,
                       const Vec2& origin = Vec2::Zero());

/// Full pipeline: calibration, peak detection, per-segment Weinberg
/// distance, heading from the attitude mechanization, dead reckoning.
/// calib_mode is RD or GC (the accelerometers are never integrated here).
MorpiTrack run_morpi(const ImuSequence& seq, MorpiMode mode,
                     CalibMode calib_mode, const WeinbergGain& gain,
                     const PeakConfig& cfg = {});

struct EndpointError {
  double meters = 0.0;
  double percent = 0.0;
};

/// Euclidean endpoint error and its percentage of the travelled distance.
EndpointError endpoint_error(const Vec2& estimate, const Vec2& truth,
                             double travelled_distance);
EndpointError endpoint_error(const MorpiTrack& track, const Vec2& truth,
                             double travelled_distance);
EndpointError endpoint_error(const NavSolution& nav, const Vec2& truth,
                             double travelled_distance);

/// Key-value gain file with an optional training-manifest hash.
void save_gain(const std::filesystem::path& path, const WeinbergGain& gain,
               const std::string& manifest_hash = "");
WeinbergGain load_gain(const std::filesystem::path& path,
                       std::string* manifest_hash = nullptr);

/// Delimited-text export `k, s_k, dpsi_k, x_k, y_k`.
void write_track_log(std::ostream& out, const MorpiTrack& track);

}  // namespace morpi
