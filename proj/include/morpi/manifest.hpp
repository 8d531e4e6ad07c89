#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "morpi/calib.hpp"
#include "morpi/pipeline.hpp"
#include "morpi/simgen.hpp"
#include "morpi/types.hpp"

namespace morpi {

/// One recording of a batch evaluation.
struct ManifestEntry {
  std::filesystem::path path;
  std::string label;
  std::string device;      // e.g. "s8", "s6"
  std::string trajectory;  // e.g. "straight", "sine_1m"
  std::string split;       // "train" | "test"
  double known_distance_m = 0.0;
  std::optional<Vec2> truth_endpoint;
};

/// JSON manifest freezing recording paths, labels and the train/test split.
struct RunManifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;
  FormatConfig format;

  static RunManifest load(const std::filesystem::path& path);

  std::vector<const ManifestEntry*> split(std::string_view which) const;
  std::filesystem::path resolve(const ManifestEntry& entry) const;

  /// FNV-1a over the entry list; identifies the training set in gain files.
  std::string content_hash() const;
};

/// Entry filter: empty fields match anything.
struct Selector {
  std::string split;
  std::string device;
  std::string trajectory;

  bool matches(const ManifestEntry& e) const {
    return (split.empty() || e.split == split) &&
           (device.empty() || e.device == device) &&
           (trajectory.empty() || e.trajectory == trajectory);
  }
};

std::vector<const ManifestEntry*> select(const RunManifest& manifest,
                                         const Selector& sel);

/// JSON loader for TrajectorySpec (used by the simulate command).
TrajectorySpec load_trajectory_spec(const std::filesystem::path& path);

struct RecordingResult {
  std::string label;
  std::string device;
  std::string trajectory;
  double error_m = 0.0;
  double error_pct = 0.0;
  Vec2 endpoint = Vec2::Zero();
  bool ok = false;
  std::string message;
};

struct EvalTable {
  std::vector<RecordingResult> rows;
  double mean_error_m = 0.0;
  double mean_error_pct = 0.0;
  /// Spread of the per-run results, reported both as the standard deviation
  /// of the error magnitudes and as the rms scatter of the endpoints about
  /// their mean.
  double error_std_m = 0.0;
  double endpoint_scatter_m = 0.0;
  int evaluated = 0;
  int failed = 0;
};

struct InsOptions {
  bool three_d = true;
  CalibMode calib = CalibMode::RD;
  double gravity = kDefaultGravity;
  StationaryConfig stationary{};
  /// Evaluate the endpoint where motion stops rather than at end of file.
  bool eval_at_motion_end = true;
};

/// Mechanizes every selected entry and scores endpoint errors against the
/// manifest truth. Per-file failures are reported in the rows; the batch
/// continues.
EvalTable evaluate_ins(const RunManifest& manifest, const Selector& sel,
                       const InsOptions& opts);

/// Runs the MoRPI pipeline over the selected entries with a trained gain.
EvalTable evaluate_morpi(const RunManifest& manifest, const Selector& sel,
                         MorpiMode mode, CalibMode calib,
                         const WeinbergGain& gain, const PeakConfig& cfg = {});

/// Trains a gain on the manifest's train split.
WeinbergGain train_gain(const RunManifest& manifest, MorpiMode mode,
                        const PeakConfig& cfg = {});

void write_eval_table(std::ostream& out, const EvalTable& table);

}  // namespace morpi
