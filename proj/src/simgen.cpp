#include "morpi/simgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

#include "morpi/errors.hpp"
#include "morpi/ingest.hpp"

namespace morpi {

namespace {

using std::numbers::pi;

/// Quintic smoothstep and derivatives on [0, 1]; C^2 at both ends.
double smooth(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double smooth_d(double s) { return 30.0 * s * s * (1.0 + s * (-2.0 + s)); }
double smooth_dd(double s) { return s * (60.0 + s * (-180.0 + 120.0 * s)); }
/// Integral of smooth() from 0 to s.
double smooth_i(double s) {
  return s * s * s * s * (2.5 + s * (-3.0 + s));
}

struct CurvePoint {
  Vec2 r;    // position
  Vec2 r1;   // d r / du
  Vec2 r2;   // d^2 r / du^2
};

/// Planar curve r(u) with closed-form derivatives; u in [0, u_max].
class Curve {
 public:
  explicit Curve(const TrajectorySpec& spec) : spec_(spec) {
    switch (spec.shape) {
      case TrajectoryShape::Straight:
        u_max_ = spec.length_m;
        unit_speed_ = true;
        break;
      case TrajectoryShape::Sine:
        u_max_ = spec.length_m;
        unit_speed_ = false;
        break;
      case TrajectoryShape::LShape:
        build_lshape();
        unit_speed_ = true;
        break;
    }
    if (!unit_speed_) build_arc_table();
  }

  double u_max() const { return u_max_; }

  double path_length() const {
    return unit_speed_ ? u_max_ : arc_s_.back();
  }

  CurvePoint eval(double u) const {
    switch (spec_.shape) {
      case TrajectoryShape::Straight:
        return {{u, 0.0}, {1.0, 0.0}, {0.0, 0.0}};
      case TrajectoryShape::Sine:
        return eval_sine(u);
      case TrajectoryShape::LShape:
        return eval_lshape(u);
    }
    return {};
  }

  /// Inverts the arc-length map; s clamped to [0, path_length].
  double u_of_s(double s) const {
    if (unit_speed_) return std::clamp(s, 0.0, u_max_);
    s = std::clamp(s, 0.0, arc_s_.back());
    auto it = std::upper_bound(arc_s_.begin(), arc_s_.end(), s);
    std::size_t j = it == arc_s_.begin()
                        ? 0
                        : static_cast<std::size_t>(it - arc_s_.begin()) - 1;
    j = std::min(j, arc_s_.size() - 2);
    double du = u_max_ / static_cast<double>(arc_s_.size() - 1);
    double u_j = du * static_cast<double>(j);
    double seg = arc_s_[j + 1] - arc_s_[j];
    double u = u_j + (seg > 0.0 ? (s - arc_s_[j]) / seg * du : 0.0);
    // one Newton polish with a local trapezoid estimate of s(u)
    double m_j = eval(u_j).r1.norm();
    double m_u = eval(u).r1.norm();
    double s_u = arc_s_[j] + 0.5 * (u - u_j) * (m_j + m_u);
    if (m_u > 0.0) u -= (s_u - s) / m_u;
    return std::clamp(u, 0.0, u_max_);
  }

 private:
  CurvePoint eval_sine(double u) const {
    double a = spec_.amplitude_m;
    double k = 2.0 * pi / spec_.period_m;
    double lr = std::min(spec_.envelope_periods * spec_.period_m,
                         0.5 * spec_.length_m);
    double e = 1.0, e1 = 0.0, e2 = 0.0;
    if (lr > 0.0 && u < lr) {
      double s = u / lr;
      e = smooth(s);
      e1 = smooth_d(s) / lr;
      e2 = smooth_dd(s) / (lr * lr);
    } else if (lr > 0.0 && u > u_max_ - lr) {
      double s = (u_max_ - u) / lr;
      e = smooth(s);
      e1 = -smooth_d(s) / lr;
      e2 = smooth_dd(s) / (lr * lr);
    }
    double sn = std::sin(k * u), cs = std::cos(k * u);
    double y = a * e * sn;
    double y1 = a * (e1 * sn + e * k * cs);
    double y2 = a * (e2 * sn + 2.0 * e1 * k * cs - e * k * k * sn);
    return {{u, y}, {1.0, y1}, {0.0, y2}};
  }

  /// 90-degree left turn rounded as spiral / arc / spiral so the curvature
  /// is continuous (the mechanization oracle needs a C^1 velocity field).
  /// Spiral length is pi R / 4, which always leaves a non-negative arc.
  void build_lshape() {
    double radius = spec_.turn_radius_m;
    kappa_ = 1.0 / radius;
    spiral_ = 0.25 * pi * radius;
    arc_ = (0.5 * pi - kappa_ * spiral_) / kappa_;
    turn_len_ = 2.0 * spiral_ + arc_;

    // trace the turn once; per-step Simpson keeps the table error ~du^5
    std::size_t n = std::max<std::size_t>(
        2048, static_cast<std::size_t>(std::ceil(turn_len_ / 1e-3)));
    double du = turn_len_ / static_cast<double>(n);
    turn_du_ = du;
    turn_pos_.resize(n + 1);
    turn_pos_[0] = Vec2::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      double u0 = du * static_cast<double>(j);
      Vec2 t0 = turn_tangent(u0);
      Vec2 tm = turn_tangent(u0 + 0.5 * du);
      Vec2 t1 = turn_tangent(u0 + du);
      turn_pos_[j + 1] = turn_pos_[j] + (du / 6.0) * (t0 + 4.0 * tm + t1);
    }
    Vec2 span = turn_pos_.back();  // displacement across the whole turn
    leg1_ = spec_.length_m - span.x();
    leg2_ = spec_.leg2_m - span.y();
    if (leg1_ <= 0.0 || leg2_ <= 0.0)
      throw ConfigError("L-shape legs too short for the turn radius");
    u_max_ = leg1_ + turn_len_ + leg2_;
  }

  /// Heading within the turn, u in [0, turn_len].
  double turn_heading(double u) const {
    if (u < spiral_) return 0.5 * kappa_ * u * u / spiral_;
    double psi = 0.5 * kappa_ * spiral_;
    if (u < spiral_ + arc_) return psi + kappa_ * (u - spiral_);
    psi += kappa_ * arc_;
    double v = turn_len_ - u;  // symmetric tail spiral
    return 0.5 * pi - 0.5 * kappa_ * v * v / spiral_;
  }

  double turn_curvature(double u) const {
    if (u < spiral_) return kappa_ * u / spiral_;
    if (u < spiral_ + arc_) return kappa_;
    return kappa_ * (turn_len_ - u) / spiral_;
  }

  Vec2 turn_tangent(double u) const {
    double psi = turn_heading(u);
    return {std::cos(psi), std::sin(psi)};
  }

  CurvePoint eval_lshape(double u) const {
    if (u <= leg1_) return {{u, 0.0}, {1.0, 0.0}, {0.0, 0.0}};
    if (u < leg1_ + turn_len_) {
      double v = u - leg1_;
      double frac = v / turn_du_;
      std::size_t j = std::min(static_cast<std::size_t>(frac),
                               turn_pos_.size() - 2);
      double w = frac - static_cast<double>(j);
      Vec2 pos = (1.0 - w) * turn_pos_[j] + w * turn_pos_[j + 1];
      pos.x() += leg1_;
      double psi = turn_heading(v);
      double k = turn_curvature(v);
      Vec2 tan(std::cos(psi), std::sin(psi));
      Vec2 nor(-std::sin(psi), std::cos(psi));
      return {pos, tan, k * nor};
    }
    double rest = u - leg1_ - turn_len_;
    return {{spec_.length_m, spec_.leg2_m - leg2_ + rest}, {0.0, 1.0}, {0.0, 0.0}};
  }

  void build_arc_table() {
    std::size_t n = std::max<std::size_t>(
        4096, static_cast<std::size_t>(
                  std::ceil(2000.0 * u_max_ / spec_.period_m)));
    arc_s_.resize(n + 1);
    arc_s_[0] = 0.0;
    double du = u_max_ / static_cast<double>(n);
    double m_prev = eval(0.0).r1.norm();
    for (std::size_t j = 1; j <= n; ++j) {
      double m = eval(du * static_cast<double>(j)).r1.norm();
      arc_s_[j] = arc_s_[j - 1] + 0.5 * du * (m_prev + m);
      m_prev = m;
    }
  }

  TrajectorySpec spec_;
  double u_max_ = 0.0;
  bool unit_speed_ = true;
  std::vector<double> arc_s_;

  // L-shape geometry
  double leg1_ = 0.0, leg2_ = 0.0;
  double kappa_ = 0.0, spiral_ = 0.0, arc_ = 0.0, turn_len_ = 0.0;
  double turn_du_ = 0.0;
  std::vector<Vec2> turn_pos_;
};

}  // namespace

TrajectoryShape trajectory_shape_from_string(std::string_view name) {
  if (name == "straight") return TrajectoryShape::Straight;
  if (name == "sine") return TrajectoryShape::Sine;
  if (name == "lshape" || name == "l-shape") return TrajectoryShape::LShape;
  throw ConfigError("unknown trajectory shape '" + std::string(name) +
                    "' (expected straight, sine or lshape)");
}

void TrajectorySpec::validate() const {
  if (!(length_m > 0.0)) throw ConfigError("length must be positive");
  if (!(rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (!(speed_mps > 0.0)) throw ConfigError("speed must be positive");
  if (ramp_s < 0.0) throw ConfigError("ramp duration must be non-negative");
  if (head_stationary_s < 0.0 || tail_stationary_s < 0.0)
    throw ConfigError("stationary durations must be non-negative");
  if (shape == TrajectoryShape::Sine) {
    if (!(period_m > 0.0)) throw ConfigError("sine period must be positive");
    if (amplitude_m < 0.0) throw ConfigError("amplitude must be non-negative");
    if (envelope_periods < 0.0)
      throw ConfigError("envelope length must be non-negative");
  }
  if (shape == TrajectoryShape::LShape) {
    if (!(turn_radius_m > 0.0))
      throw ConfigError("turn radius must be positive");
    if (length_m <= turn_radius_m || leg2_m <= turn_radius_m)
      throw ConfigError("L-shape legs must exceed the turn radius");
  }
}

TruthTrajectory generate_truth(const TrajectorySpec& spec) {
  spec.validate();
  Curve curve(spec);
  double path = curve.path_length();
  double v = spec.speed_mps;
  double tr = spec.ramp_s;
  if (path <= v * tr)
    throw ConfigError("path too short for the requested speed ramps");
  double motion_T = path / v + tr;  // each ramp sweeps half its cruise length
  double total_T = spec.head_stationary_s + motion_T + spec.tail_stationary_s;
  double dt = 1.0 / spec.rate_hz;
  std::size_t n = static_cast<std::size_t>(std::ceil(total_T / dt - 1e-9)) + 1;

  // arc position / speed / acceleration along the path at time tm >= 0
  auto arc_state = [&](double tm, double& s, double& sd, double& sdd) {
    double t_cruise_end = motion_T - tr;
    if (tm <= 0.0) {
      s = 0.0; sd = 0.0; sdd = 0.0;
    } else if (tr > 0.0 && tm < tr) {
      double q = tm / tr;
      s = v * tr * smooth_i(q);
      sd = v * smooth(q);
      sdd = v * smooth_d(q) / tr;
    } else if (tm < t_cruise_end) {
      s = v * tr * 0.5 + v * (tm - tr);
      sd = v;
      sdd = 0.0;
    } else if (tm < motion_T) {
      double q = (motion_T - tm) / tr;
      s = path - v * tr * smooth_i(q);
      sd = v * smooth(q);
      sdd = -v * smooth_d(q) / tr;
    } else {
      s = path; sd = 0.0; sdd = 0.0;
    }
  };

  TruthTrajectory out;
  out.path_length = path;
  out.t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = dt * static_cast<double>(i);
    double s, sd, sdd;
    arc_state(t - spec.head_stationary_s, s, sd, sdd);
    double u = curve.u_of_s(s);
    CurvePoint c = curve.eval(u);
    double m = c.r1.norm();
    double ud = m > 0.0 ? sd / m : 0.0;
    double m1 = m > 0.0 ? c.r1.dot(c.r2) / m : 0.0;  // d|r'|/du
    double udd = m > 0.0 ? (sdd - m1 * ud * ud) / m : 0.0;
    Vec2 acc = c.r2 * (ud * ud) + c.r1 * udd;
    double psi = std::atan2(c.r1.y(), c.r1.x());
    double dpsi_du =
        m > 0.0 ? (c.r1.x() * c.r2.y() - c.r1.y() * c.r2.x()) / (m * m) : 0.0;

    out.t.push_back(t);
    out.x.push_back(c.r.x());
    out.y.push_back(c.r.y());
    out.psi.push_back(psi);
    out.ax.push_back(acc.x());
    out.ay.push_back(acc.y());
    out.psidot.push_back(dpsi_du * ud);
  }
  return out;
}

namespace {

std::vector<double> unwrap(const std::vector<double>& psi) {
  std::vector<double> out = psi;
  for (std::size_t i = 1; i < out.size(); ++i) {
    double d = out[i] - out[i - 1];
    d -= 2.0 * pi * std::round(d / (2.0 * pi));
    out[i] = out[i - 1] + d;
  }
  return out;
}

/// Second-order finite differences on a uniformly sampled series.
void differentiate(const std::vector<double>& t, const std::vector<double>& x,
                   std::vector<double>& d1, std::vector<double>& d2) {
  std::size_t n = x.size();
  d1.assign(n, 0.0);
  d2.assign(n, 0.0);
  if (n < 3) return;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double h = 0.5 * (t[i + 1] - t[i - 1]);
    d1[i] = (x[i + 1] - x[i - 1]) / (2.0 * h);
    d2[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (h * h);
  }
  d1[0] = d1[1];
  d2[0] = d2[1];
  d1[n - 1] = d1[n - 2];
  d2[n - 1] = d2[n - 2];
}

}  // namespace

ImuSequence imu_from_truth(const TruthTrajectory& truth, double gravity) {
  std::size_t n = truth.t.size();
  if (n < 2) throw StructuralError("truth trajectory needs at least 2 samples");

  std::vector<double> ax, ay, psidot;
  if (truth.has_kinematics()) {
    ax = truth.ax;
    ay = truth.ay;
    psidot = truth.psidot;
  } else {
    std::vector<double> vx, vy, pd2;
    differentiate(truth.t, truth.x, vx, ax);
    differentiate(truth.t, truth.y, vy, ay);
    std::vector<double> psi_u = unwrap(truth.psi);
    differentiate(truth.t, psi_u, psidot, pd2);
  }

  ImuSequence seq;
  seq.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double c = std::cos(truth.psi[i]), s = std::sin(truth.psi[i]);
    ImuSample& m = seq.samples[i];
    m.t = truth.t[i];
    m.f << c * ax[i] + s * ay[i], -s * ax[i] + c * ay[i], -gravity;
    m.w << 0.0, 0.0, psidot[i];
  }
  seq.rate_hz = ImuSequence::median_rate(seq.samples);
  seq.meta["generator"] = "simgen";
  return seq;
}

ImuSequence corrupt(const ImuSequence& seq, const SensorSpec& spec,
                    std::uint64_t seed) {
  double rate = seq.rate_hz > 0.0 ? seq.rate_hz
                                  : ImuSequence::median_rate(seq.samples);
  double sigma_f = spec.accel_noise_density * std::sqrt(rate);
  double sigma_w = spec.gyro_noise_density * std::sqrt(rate);

  std::mt19937_64 rng(seed);
  // explicit Box-Muller: identical output on every platform for a given seed
  auto uniform = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };
  auto gauss = [&]() {
    double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  };

  ImuSequence out = seq;
  for (ImuSample& s : out.samples) {
    for (int a = 0; a < 3; ++a) {
      s.f[a] += spec.accel_bias[a] + sigma_f * gauss();
      s.w[a] += spec.gyro_bias[a] + sigma_w * gauss();
    }
  }
  return out;
}

void write_truth_log(std::ostream& out, const TruthTrajectory& truth) {
  out << "t,x,y,psi\n";
  std::string line;
  char buf[32];
  auto append = [&](double v, char sep) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    line.append(buf, ptr);
    line.push_back(sep);
  };
  for (std::size_t i = 0; i < truth.t.size(); ++i) {
    line.clear();
    append(truth.t[i], ',');
    append(truth.x[i], ',');
    append(truth.y[i], ',');
    append(truth.psi[i], '\n');
    out << line;
  }
}

void save_truth_file(const std::filesystem::path& path,
                     const TruthTrajectory& truth) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write truth file '" + path.string() + "'");
  write_truth_log(out, truth);
}

TruthTrajectory load_truth_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open truth file '" + path.string() + "'");
  TruthTrajectory truth;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    double v[4];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 4; ++k) {
      auto [ptr, ec] = std::from_chars(p, end, v[k]);
      if (ec != std::errc{})
        throw ParseError("line " + std::to_string(line_no) +
                         ": bad truth row");
      p = ptr;
      if (k < 3) {
        if (p == end || *p != ',')
          throw ParseError("line " + std::to_string(line_no) +
                           ": expected 4 comma-separated values");
        ++p;
      }
    }
    truth.t.push_back(v[0]);
    truth.x.push_back(v[1]);
    truth.y.push_back(v[2]);
    truth.psi.push_back(v[3]);
  }
  if (truth.t.empty()) throw StructuralError("no data rows in truth file");
  return truth;
}

}  // namespace morpi
