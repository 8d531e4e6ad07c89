#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "morpi/errmodel.hpp"
#include "morpi/errors.hpp"
#include "morpi/manifest.hpp"

namespace fs = std::filesystem;
using namespace morpi;

namespace {

// exit codes: 0 ok, 2 config, 3 parse/structure, 4 computation
constexpr int kConfigExit = 2;
constexpr int kParseExit = 3;
constexpr int kComputeExit = 4;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void write_results_csv(const fs::path& path, const EvalTable& table) {
  std::ofstream out = open_out(path);
  out.precision(12);
  out << "label,error_m,error_pct,endpoint_x,endpoint_y,status\n";
  for (const RecordingResult& r : table.rows) {
    if (r.ok)
      out << r.label << ',' << r.error_m << ',' << r.error_pct << ','
          << r.endpoint.x() << ',' << r.endpoint.y() << ",ok\n";
    else
      out << r.label << ",,,,,\"" << r.message << "\"\n";
  }
  out << "mean," << table.mean_error_m << ',' << table.mean_error_pct
      << ",,,\n";
}

Vec3 parse_vec3(const std::string& text) {
  Vec3 v;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',')
    throw ConfigError("expected three comma-separated numbers, got '" + text +
                      "'");
  return v;
}

void add_selector_flags(CLI::App* cmd, Selector& sel) {
  sel.split = "test";
  cmd->add_option("--split", sel.split, "Manifest split (train|test|empty=all)");
  cmd->add_option("--device", sel.device, "Filter by device label");
  cmd->add_option("--trajectory", sel.trajectory, "Filter by trajectory label");
}

void add_peak_flags(CLI::App* cmd, PeakConfig& cfg) {
  cmd->add_option("--cutoff-hz", cfg.lowpass_cutoff_hz,
                  "Low-pass cutoff for peak detection [Hz]");
  cmd->add_option("--min-sep-frac", cfg.min_separation_frac,
                  "Min peak separation as a fraction of the median period");
  cmd->add_option("--prominence-frac", cfg.prominence_iqr_frac,
                  "Prominence threshold as a fraction of the signal IQR");
  cmd->add_option("--gravity", cfg.stationary.gravity, "Gravity [m/s^2]");
}

int cmd_simulate(const fs::path& spec_path, const std::string& preset,
                 std::uint64_t seed, const fs::path& out_imu,
                 const fs::path& out_truth) {
  TrajectorySpec spec = load_trajectory_spec(spec_path);
  TruthTrajectory truth = generate_truth(spec);
  ImuSequence imu = imu_from_truth(truth);
  imu = corrupt(imu, SensorSpec::by_name(preset), seed);
  save_imu_file(out_imu, imu);
  if (!out_truth.empty()) save_truth_file(out_truth, truth);
  std::cout << "wrote " << imu.size() << " samples to " << out_imu
            << " (preset " << preset << ", seed " << seed << ")\n"
            << "truth endpoint (" << truth.endpoint().x() << ", "
            << truth.endpoint().y() << "), path length " << truth.path_length
            << " m\n";
  return 0;
}

int cmd_gain(const fs::path& manifest_path, const std::string& mode_name,
             const PeakConfig& cfg, const fs::path& out) {
  RunManifest manifest = RunManifest::load(manifest_path);
  MorpiMode mode = morpi_mode_from_string(mode_name);
  WeinbergGain gain = train_gain(manifest, mode, cfg);
  save_gain(out, gain, manifest.content_hash());
  std::cout << "mode " << to_string(mode) << ": gain " << gain.value
            << " from " << gain.training_runs << " training runs -> " << out
            << "\n";
  return 0;
}

int cmd_morpi(const fs::path& manifest_path, const std::string& mode_name,
              const std::string& calib_name, const fs::path& gain_path,
              const PeakConfig& cfg, const Selector& sel, const fs::path& out,
              const fs::path& export_dir) {
  RunManifest manifest = RunManifest::load(manifest_path);
  MorpiMode mode = morpi_mode_from_string(mode_name);
  CalibMode calib = calib_mode_from_string(calib_name);
  WeinbergGain gain = load_gain(gain_path);
  if (gain.mode != mode)
    throw ConfigError(std::string("gain file ") + gain_path.string() +
                      " was trained for mode " + to_string(gain.mode));
  if (calib == CalibMode::GAC)
    throw ConfigError("MoRPI takes --calib rd or gc");

  EvalTable table = evaluate_morpi(manifest, sel, mode, calib, gain, cfg);
  std::cout << "MoRPI-" << to_string(mode) << " (" << to_string(calib)
            << "), " << manifest_path.string() << "\n";
  write_eval_table(std::cout, table);
  if (!out.empty()) write_results_csv(out, table);

  if (!export_dir.empty()) {
    fs::create_directories(export_dir);
    for (const ManifestEntry* e : select(manifest, sel)) {
      try {
        ImuSequence seq = load_imu_file(manifest.resolve(*e), manifest.format);
        MorpiTrack track = run_morpi(seq, mode, calib, gain, cfg);
        std::ofstream tf = open_out(export_dir / (e->label + "_track.csv"));
        write_track_log(tf, track);
      } catch (const Error& ex) {
        std::cerr << "export " << e->label << " failed: " << ex.what() << "\n";
      }
    }
  }
  return 0;
}

int cmd_ins(const fs::path& manifest_path, const std::string& dim,
            const std::string& calib_name, const std::string& eval_at,
            const Selector& sel, const fs::path& out,
            const fs::path& export_dir, double gravity) {
  RunManifest manifest = RunManifest::load(manifest_path);
  InsOptions opts;
  if (dim == "3d")
    opts.three_d = true;
  else if (dim == "2d")
    opts.three_d = false;
  else
    throw ConfigError("--dim must be 2d or 3d");
  opts.calib = calib_mode_from_string(calib_name);
  if (eval_at != "motion-end" && eval_at != "file-end")
    throw ConfigError("--eval-at must be motion-end or file-end");
  opts.eval_at_motion_end = eval_at == "motion-end";
  opts.gravity = gravity;
  opts.stationary.gravity = gravity;

  EvalTable table = evaluate_ins(manifest, sel, opts);
  std::cout << (opts.three_d ? "3D" : "2D") << " INS ("
            << to_string(opts.calib) << "), test split of "
            << manifest_path.string() << "\n";
  write_eval_table(std::cout, table);
  if (!out.empty()) write_results_csv(out, table);

  if (!export_dir.empty()) {
    fs::create_directories(export_dir);
    for (const ManifestEntry* e : select(manifest, sel)) {
      try {
        ImuSequence seq = load_imu_file(manifest.resolve(*e), manifest.format);
        ImuSequence cal = calibrated(seq, opts.calib, opts.stationary);
        NavSolution nav = opts.three_d ? mechanize_3d(cal, {}, gravity)
                                       : mechanize_2d(cal, {}, gravity);
        std::ofstream nf = open_out(export_dir / (e->label + "_nav.csv"));
        write_nav_log(nf, nav);
      } catch (const Error& ex) {
        std::cerr << "export " << e->label << " failed: " << ex.what() << "\n";
      }
    }
  }
  if (table.rows.empty()) std::cerr << "warning: no test entries in manifest\n";
  return 0;
}

int cmd_errmodel(const std::string& dv0, const std::string& ba,
                 const std::string& bg, double gravity,
                 const std::string& dg_list, double grid_end, double grid_step,
                 const fs::path& morpi_spec_path, const fs::path& out) {
  ErrorInputs inputs;
  inputs.dv0 = parse_vec3(dv0);
  inputs.ba = parse_vec3(ba);
  inputs.bg = parse_vec3(bg);
  inputs.gravity = gravity;

  std::vector<double> dgs;
  std::istringstream ds(dg_list);
  for (std::string tok; std::getline(ds, tok, ',');) {
    try {
      dgs.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad gain-error fraction '" + tok + "'");
    }
  }

  if (!(grid_end > 0.0) || !(grid_step > 0.0))
    throw ConfigError("grid end and step must be positive");
  std::vector<double> grid;
  for (double t = 0.0; t <= grid_end + 1e-12; t += grid_step)
    grid.push_back(t);

  // MoRPI segment schedule: an ideal periodic run scored with a closure gain
  TrajectorySpec spec;
  if (!morpi_spec_path.empty()) {
    spec = load_trajectory_spec(morpi_spec_path);
  } else {
    spec.shape = TrajectoryShape::Sine;
    spec.length_m = 6.3;
    spec.amplitude_m = 0.1;
    spec.period_m = 1.0;
    spec.speed_mps = 1.0;
    spec.head_stationary_s = 1.0;
    spec.tail_stationary_s = 1.0;
  }
  TruthTrajectory truth = generate_truth(spec);
  ImuSequence imu = imu_from_truth(truth, gravity);
  PeakSet peaks = detect_peaks(imu, MorpiMode::A);
  auto bounds = peaks.segment_boundaries();
  std::vector<double> delta_f, seg_end;
  double t0 = imu.samples[peaks.motion_start].t;
  double total_df = 0.0;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    double df = range_quarter(imu, MorpiMode::A, bounds[k], bounds[k + 1]);
    delta_f.push_back(df);
    total_df += df;
    seg_end.push_back(imu.samples[bounds[k + 1]].t - t0);
  }
  double gain_value = spec.length_m / total_df;  // closure gain

  ErrorBudget budget =
      make_error_budget(inputs, grid, dgs, delta_f, seg_end, gain_value);
  if (!out.empty()) {
    std::ofstream of = open_out(out);
    write_budget_log(of, budget);
  } else {
    write_budget_log(std::cout, budget);
  }

  std::cout.precision(6);
  std::cout << "# e3d(" << grid.back() << " s) = " << budget.e3d.back()
            << " m, e2d = " << budget.e2d.back() << " m\n";
  for (double dg : dgs) {
    auto ds_curve = morpi_error(dg, delta_f, gain_value);
    std::cout << "# morpi ds(dG=" << dg * 100 << "%) after "
              << delta_f.size() << " segments = " << ds_curve.back() << " m\n";
  }
  return 0;
}

int cmd_evaluate(const fs::path& manifest_path, const fs::path& gain_a_path,
                 const fs::path& gain_g_path, const PeakConfig& cfg,
                 const Selector& sel, const fs::path& out) {
  RunManifest manifest = RunManifest::load(manifest_path);

  struct Method {
    std::string name;
    EvalTable table;
  };
  std::vector<Method> methods;

  InsOptions ins3;
  ins3.calib = CalibMode::GAC;
  ins3.gravity = cfg.stationary.gravity;
  methods.push_back({"3D INS (GAC)", evaluate_ins(manifest, sel, ins3)});
  InsOptions ins2 = ins3;
  ins2.three_d = false;
  methods.push_back({"2D INS (GAC)", evaluate_ins(manifest, sel, ins2)});

  if (!gain_a_path.empty()) {
    WeinbergGain ga = load_gain(gain_a_path);
    methods.push_back({"MoRPI-A (GC)",
                       evaluate_morpi(manifest, sel, MorpiMode::A,
                                      CalibMode::GC, ga, cfg)});
  }
  if (!gain_g_path.empty()) {
    WeinbergGain gg = load_gain(gain_g_path);
    methods.push_back({"MoRPI-G (GC)",
                       evaluate_morpi(manifest, sel, MorpiMode::G,
                                      CalibMode::GC, gg, cfg)});
  }

  std::cout << "method comparison, test split of " << manifest_path.string()
            << "\n";
  std::cout << std::left << std::setw(16) << "method" << std::right
            << std::setw(12) << "mean [m]" << std::setw(12) << "mean [%]"
            << std::setw(14) << "err std [m]" << std::setw(14)
            << "scatter [m]" << "\n";
  for (const Method& m : methods) {
    std::cout << std::left << std::setw(16) << m.name << std::right
              << std::setw(12) << std::fixed << std::setprecision(3)
              << m.table.mean_error_m << std::setw(12) << std::setprecision(2)
              << m.table.mean_error_pct << std::setw(14)
              << std::setprecision(4) << m.table.error_std_m << std::setw(14)
              << m.table.endpoint_scatter_m << "\n";
    std::cout.unsetf(std::ios::fixed);
  }
  std::cout << "error ratios (column / row); improvement percentages in the "
               "literature mix formulas, so only raw ratios are reported\n";
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j) {
      double a = methods[i].table.mean_error_m;
      double b = methods[j].table.mean_error_m;
      if (a > 0.0)
        std::cout << "  " << methods[j].name << " / " << methods[i].name
                  << " = " << b / a << "\n";
    }

  if (!out.empty()) {
    std::ofstream of = open_out(out);
    of.precision(12);
    of << "method,mean_error_m,mean_error_pct,error_std_m,endpoint_scatter_m,"
          "evaluated,failed\n";
    for (const Method& m : methods)
      of << '"' << m.name << "\"," << m.table.mean_error_m << ','
         << m.table.mean_error_pct << ',' << m.table.error_std_m << ','
         << m.table.endpoint_scatter_m << ',' << m.table.evaluated << ','
         << m.table.failed << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pure-inertial dead reckoning for wheeled robots: strapdown "
               "INS and periodic-motion (MoRPI) estimators"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Generate synthetic IMU data");
  fs::path sim_spec, sim_imu = "imu.csv", sim_truth;
  std::string sim_preset = "ideal";
  std::uint64_t sim_seed = 0;
  sim->add_option("--spec", sim_spec, "Trajectory spec JSON")->required();
  sim->add_option("--preset", sim_preset,
                  "Sensor preset: ideal|mpu6500|lsm6dsl");
  sim->add_option("--seed", sim_seed, "Noise seed");
  sim->add_option("--out-imu", sim_imu, "Output IMU log");
  sim->add_option("--out-truth", sim_truth, "Output truth log");

  auto* gain = app.add_subcommand("gain", "Train a Weinberg gain");
  fs::path gain_manifest, gain_out = "gain.txt";
  std::string gain_mode = "g";
  PeakConfig gain_cfg;
  gain->add_option("--manifest", gain_manifest, "Run manifest JSON")
      ->required();
  gain->add_option("--mode", gain_mode, "a (accel-y) or g (gyro-z)");
  gain->add_option("--out", gain_out, "Output gain file");
  add_peak_flags(gain, gain_cfg);

  auto* mor = app.add_subcommand("morpi", "Evaluate the MoRPI pipeline");
  fs::path mor_manifest, mor_gain, mor_out, mor_export;
  std::string mor_mode = "g", mor_calib = "gc";
  PeakConfig mor_cfg;
  mor->add_option("--manifest", mor_manifest, "Run manifest JSON")->required();
  mor->add_option("--mode", mor_mode, "a or g");
  mor->add_option("--calib", mor_calib, "rd or gc");
  mor->add_option("--gain", mor_gain, "Trained gain file")->required();
  mor->add_option("--out", mor_out, "Results CSV");
  mor->add_option("--export-tracks", mor_export, "Directory for track logs");
  Selector mor_sel;
  add_selector_flags(mor, mor_sel);
  add_peak_flags(mor, mor_cfg);

  auto* ins = app.add_subcommand("ins", "Evaluate strapdown INS");
  fs::path ins_manifest, ins_out, ins_export;
  std::string ins_dim = "3d", ins_calib = "rd", ins_eval_at = "motion-end";
  double ins_gravity = kDefaultGravity;
  ins->add_option("--manifest", ins_manifest, "Run manifest JSON")->required();
  ins->add_option("--dim", ins_dim, "2d or 3d");
  ins->add_option("--calib", ins_calib, "rd or gac");
  ins->add_option("--eval-at", ins_eval_at, "motion-end or file-end");
  ins->add_option("--gravity", ins_gravity, "Gravity [m/s^2]");
  ins->add_option("--out", ins_out, "Results CSV");
  ins->add_option("--export-nav", ins_export,
                  "Directory for NavSolution logs");
  Selector ins_sel;
  add_selector_flags(ins, ins_sel);

  auto* err =
      app.add_subcommand("errmodel", "Closed-form INS/MoRPI error curves");
  std::string err_dv0 = "0,0,0", err_ba = "0,0,0", err_bg = "0,0,0";
  std::string err_dg = "0.05,0.10";
  double err_gravity = kDefaultGravity, err_end = 15.0, err_step = 0.01;
  fs::path err_spec, err_out;
  err->add_option("--dv0", err_dv0, "Initial velocity error x,y,z [m/s]");
  err->add_option("--ba", err_ba, "Accel bias x,y,z [m/s^2]");
  err->add_option("--bg", err_bg, "Gyro bias x,y,z [rad/s]");
  err->add_option("--gravity", err_gravity, "Gravity [m/s^2]");
  err->add_option("--dg", err_dg, "Gain-error fractions, comma separated");
  err->add_option("--grid-end", err_end, "Time grid end [s]");
  err->add_option("--grid-step", err_step, "Time grid step [s]");
  err->add_option("--morpi-spec", err_spec,
                  "Trajectory spec JSON for the MoRPI segment schedule");
  err->add_option("--out", err_out, "Curve CSV (default: stdout)");

  auto* ev =
      app.add_subcommand("evaluate", "Compare INS and MoRPI on one manifest");
  fs::path ev_manifest, ev_gain_a, ev_gain_g, ev_out;
  PeakConfig ev_cfg;
  ev->add_option("--manifest", ev_manifest, "Run manifest JSON")->required();
  ev->add_option("--gain-a", ev_gain_a, "MoRPI-A gain file");
  ev->add_option("--gain-g", ev_gain_g, "MoRPI-G gain file");
  ev->add_option("--out", ev_out, "Comparison CSV");
  Selector ev_sel;
  add_selector_flags(ev, ev_sel);
  add_peak_flags(ev, ev_cfg);

  try {
    app.parse(argc, argv);
    if (sim->parsed())
      return cmd_simulate(sim_spec, sim_preset, sim_seed, sim_imu, sim_truth);
    if (gain->parsed())
      return cmd_gain(gain_manifest, gain_mode, gain_cfg, gain_out);
    if (mor->parsed())
      return cmd_morpi(mor_manifest, mor_mode, mor_calib, mor_gain, mor_cfg,
                       mor_sel, mor_out, mor_export);
    if (ins->parsed())
      return cmd_ins(ins_manifest, ins_dim, ins_calib, ins_eval_at, ins_sel,
                     ins_out, ins_export, ins_gravity);
    if (err->parsed())
      return cmd_errmodel(err_dv0, err_ba, err_bg, err_gravity, err_dg,
                          err_end, err_step, err_spec, err_out);
    if (ev->parsed())
      return cmd_evaluate(ev_manifest, ev_gain_a, ev_gain_g, ev_cfg, ev_sel,
                          ev_out);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParseExit;
  } catch (const StructuralError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kParseExit;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kComputeExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kComputeExit;
  }
  return 0;
}
