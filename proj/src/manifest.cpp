#include "morpi/manifest.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "morpi/errors.hpp"

namespace morpi {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

FormatConfig format_from_json(const json& j) {
  FormatConfig f;
  if (j.contains("delimiter")) {
    std::string d = j.at("delimiter").get<std::string>();
    if (d.size() != 1) throw ConfigError("delimiter must be one character");
    f.delimiter = d[0];
  }
  f.header_rows = j.value("header_rows", f.header_rows);
  if (j.contains("columns")) {
    const json& c = j.at("columns");
    f.col_t = c.value("t", f.col_t);
    const char* fk[3] = {"fx", "fy", "fz"};
    const char* wk[3] = {"wx", "wy", "wz"};
    for (int a = 0; a < 3; ++a) {
      f.col_f[a] = c.value(fk[a], f.col_f[a]);
      f.col_w[a] = c.value(wk[a], f.col_w[a]);
    }
  }
  f.time_scale = j.value("time_scale", f.time_scale);
  f.accel_scale = j.value("accel_scale", f.accel_scale);
  f.gyro_scale = j.value("gyro_scale", f.gyro_scale);
  f.rebase_time = j.value("rebase_time", f.rebase_time);
  if (j.contains("axis_permutation")) {
    const json& m = j.at("axis_permutation");
    if (m.size() != 3) throw ConfigError("axis_permutation must be 3x3");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        f.axis_permutation(r, c) = m.at(r).at(c).get<double>();
  }
  return f;
}

}  // namespace

RunManifest RunManifest::load(const std::filesystem::path& path) {
  json j = read_json(path);
  RunManifest m;
  m.base_dir = path.has_parent_path() ? path.parent_path()
                                      : std::filesystem::path(".");
  if (j.contains("base_dir"))
    m.base_dir = m.base_dir / j.at("base_dir").get<std::string>();
  if (j.contains("format")) m.format = format_from_json(j.at("format"));
  if (!j.contains("entries") || !j.at("entries").is_array())
    throw ConfigError("manifest '" + path.string() +
                      "' needs an 'entries' array");
  for (const json& e : j.at("entries")) {
    ManifestEntry entry;
    entry.path = e.at("path").get<std::string>();
    entry.label = e.value("label", entry.path.stem().string());
    entry.device = e.value("device", "");
    entry.trajectory = e.value("trajectory", "");
    entry.split = e.value("split", "test");
    if (entry.split != "train" && entry.split != "test")
      throw ConfigError("entry '" + entry.label + "': split must be train or "
                        "test, got '" + entry.split + "'");
    entry.known_distance_m = e.value("known_distance_m", 0.0);
    if (!(entry.known_distance_m > 0.0))
      throw ConfigError("entry '" + entry.label +
                        "': known_distance_m must be positive");
    if (e.contains("truth_endpoint")) {
      const json& te = e.at("truth_endpoint");
      entry.truth_endpoint = Vec2(te.at(0).get<double>(), te.at(1).get<double>());
    }
    m.entries.push_back(std::move(entry));
  }
  return m;
}

std::vector<const ManifestEntry*> RunManifest::split(
    std::string_view which) const {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& e : entries)
    if (e.split == which) out.push_back(&e);
  return out;
}

std::vector<const ManifestEntry*> select(const RunManifest& manifest,
                                         const Selector& sel) {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& e : manifest.entries)
    if (sel.matches(e)) out.push_back(&e);
  return out;
}

std::filesystem::path RunManifest::resolve(const ManifestEntry& entry) const {
  return entry.path.is_absolute() ? entry.path : base_dir / entry.path;
}

std::string RunManifest::content_hash() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const ManifestEntry& e : entries) {
    mix(e.path.string());
    mix(e.split);
    mix(std::to_string(e.known_distance_m));
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

TrajectorySpec load_trajectory_spec(const std::filesystem::path& path) {
  json j = read_json(path);
  TrajectorySpec s;
  s.shape = trajectory_shape_from_string(j.value("shape", "straight"));
  s.length_m = j.value("length_m", s.length_m);
  s.leg2_m = j.value("leg2_m", s.leg2_m);
  s.turn_radius_m = j.value("turn_radius_m", s.turn_radius_m);
  s.amplitude_m = j.value("amplitude_m", s.amplitude_m);
  s.period_m = j.value("period_m", s.period_m);
  s.envelope_periods = j.value("envelope_periods", s.envelope_periods);
  s.speed_mps = j.value("speed_mps", s.speed_mps);
  s.ramp_s = j.value("ramp_s", s.ramp_s);
  s.head_stationary_s = j.value("head_stationary_s", s.head_stationary_s);
  s.tail_stationary_s = j.value("tail_stationary_s", s.tail_stationary_s);
  s.rate_hz = j.value("rate_hz", s.rate_hz);
  s.validate();
  return s;
}

namespace {

/// Runs `score` over the split's entries in parallel and aggregates the rows
/// in manifest order.
EvalTable run_batch(
    const RunManifest& manifest, const Selector& sel,
    const std::function<RecordingResult(const ManifestEntry&)>& score) {
  auto entries = select(manifest, sel);
  std::vector<std::future<RecordingResult>> futures;
  futures.reserve(entries.size());
  for (const ManifestEntry* e : entries)
    futures.push_back(
        std::async(std::launch::async, [&score, e] { return score(*e); }));

  EvalTable table;
  Vec2 endpoint_sum = Vec2::Zero();
  for (auto& f : futures) table.rows.push_back(f.get());
  for (const RecordingResult& r : table.rows) {
    if (!r.ok) {
      ++table.failed;
      continue;
    }
    ++table.evaluated;
    table.mean_error_m += r.error_m;
    table.mean_error_pct += r.error_pct;
    endpoint_sum += r.endpoint;
  }
  if (table.evaluated > 0) {
    table.mean_error_m /= table.evaluated;
    table.mean_error_pct /= table.evaluated;
    Vec2 endpoint_mean = endpoint_sum / table.evaluated;
    double var_e = 0.0, var_p = 0.0;
    for (const RecordingResult& r : table.rows) {
      if (!r.ok) continue;
      var_e += std::pow(r.error_m - table.mean_error_m, 2);
      var_p += (r.endpoint - endpoint_mean).squaredNorm();
    }
    int n = table.evaluated;
    table.error_std_m = n > 1 ? std::sqrt(var_e / (n - 1)) : 0.0;
    table.endpoint_scatter_m = n > 1 ? std::sqrt(var_p / (n - 1)) : 0.0;
  }
  return table;
}

RecordingResult fail_row(const ManifestEntry& e, const std::string& why) {
  RecordingResult r;
  r.label = e.label;
  r.device = e.device;
  r.trajectory = e.trajectory;
  r.ok = false;
  r.message = why;
  return r;
}

}  // namespace

EvalTable evaluate_ins(const RunManifest& manifest, const Selector& sel,
                       const InsOptions& opts) {
  return run_batch(manifest, sel, [&](const ManifestEntry& e) {
    try {
      if (!e.truth_endpoint)
        return fail_row(e, "entry has no truth_endpoint");
      ImuSequence seq = load_imu_file(manifest.resolve(e), manifest.format);
      ImuSequence cal = calibrated(seq, opts.calib, opts.stationary);

      std::size_t at = cal.size() - 1;
      if (opts.eval_at_motion_end) {
        MotionBounds b =
            motion_bounds(cal, detect_stationary(cal, opts.stationary));
        if (b.end > b.begin) at = b.end - 1;
      }
      Vec2 end;
      if (opts.three_d) {
        NavSolution nav = mechanize_3d(cal, {}, opts.gravity);
        end = nav.states[at].p.head<2>();
      } else {
        NavSolution nav = mechanize_2d(cal, {}, opts.gravity);
        end = nav.states[at].p.head<2>();
      }
      EndpointError err =
          endpoint_error(end, *e.truth_endpoint, e.known_distance_m);
      return RecordingResult{e.label,     e.device, e.trajectory, err.meters,
                             err.percent, end,      true,         ""};
    } catch (const Error& ex) {
      return fail_row(e, ex.what());
    }
  });
}

EvalTable evaluate_morpi(const RunManifest& manifest, const Selector& sel,
                         MorpiMode mode, CalibMode calib,
                         const WeinbergGain& gain, const PeakConfig& cfg) {
  return run_batch(manifest, sel, [&](const ManifestEntry& e) {
    try {
      if (!e.truth_endpoint)
        return fail_row(e, "entry has no truth_endpoint");
      ImuSequence seq = load_imu_file(manifest.resolve(e), manifest.format);
      MorpiTrack track = run_morpi(seq, mode, calib, gain, cfg);
      EndpointError err =
          endpoint_error(track, *e.truth_endpoint, e.known_distance_m);
      return RecordingResult{e.label,     e.device,         e.trajectory,
                             err.meters,  err.percent,      track.endpoint(),
                             true,        ""};
    } catch (const Error& ex) {
      return fail_row(e, ex.what());
    }
  });
}

WeinbergGain train_gain(const RunManifest& manifest, MorpiMode mode,
                        const PeakConfig& cfg) {
  auto entries = manifest.split("train");
  if (entries.empty())
    throw ConfigError("manifest has no train entries");
  std::vector<std::pair<ImuSequence, double>> runs;
  runs.reserve(entries.size());
  for (const ManifestEntry* e : entries)
    runs.emplace_back(load_imu_file(manifest.resolve(*e), manifest.format),
                      e->known_distance_m);
  return estimate_gain(runs, mode, cfg);
}

void write_eval_table(std::ostream& out, const EvalTable& table) {
  out << std::left << std::setw(28) << "recording" << std::right
      << std::setw(12) << "error [m]" << std::setw(12) << "error [%]"
      << "\n";
  for (const RecordingResult& r : table.rows) {
    if (r.ok)
      out << std::left << std::setw(28) << r.label << std::right
          << std::setw(12) << std::fixed << std::setprecision(3) << r.error_m
          << std::setw(12) << std::setprecision(2) << r.error_pct << "\n";
    else
      out << std::left << std::setw(28) << r.label << "  FAILED: " << r.message
          << "\n";
  }
  out << std::left << std::setw(28) << "mean" << std::right << std::setw(12)
      << std::fixed << std::setprecision(3) << table.mean_error_m
      << std::setw(12) << std::setprecision(2) << table.mean_error_pct << "\n"
      << "error std: " << std::setprecision(4) << table.error_std_m
      << " m, endpoint scatter: " << table.endpoint_scatter_m << " m, "
      << table.evaluated << " evaluated, " << table.failed << " failed\n";

  // device x trajectory breakdown when the batch mixes groups
  std::map<std::string, std::pair<double, int>> groups;
  for (const RecordingResult& r : table.rows)
    if (r.ok) {
      auto& [sum, n] = groups[r.device + " / " + r.trajectory];
      sum += r.error_pct;
      ++n;
    }
  if (groups.size() > 1) {
    for (const auto& [name, acc] : groups)
      out << std::left << std::setw(28) << ("  " + name) << std::right
          << std::setw(12) << "" << std::setw(12) << std::setprecision(2)
          << acc.first / acc.second << "\n";
  }
  out.unsetf(std::ios::fixed);
}

}  // namespace morpi
