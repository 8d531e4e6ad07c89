#include "morpi/strapdown.hpp"

#include <cmath>
#include <ostream>

#include "morpi/errors.hpp"

namespace morpi {

Vec2 NavSolution::travelled_endpoint() const {
  if (states.empty()) return Vec2::Zero();
  return states.back().p.head<2>();
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Mat3 rodrigues(const Vec3& phi) {
  double theta2 = phi.squaredNorm();
  Mat3 k = skew(phi);
  if (theta2 < 1e-24) return Mat3::Identity() + k + 0.5 * k * k;
  double theta = std::sqrt(theta2);
  double a = std::sin(theta) / theta;
  double b = (1.0 - std::cos(theta)) / theta2;
  return Mat3::Identity() + a * k + b * k * k;
}

Mat3 orthonormalize(const Mat3& C) {
  // Newton iteration for the polar factor; one step suffices when C is
  // already within integration round-off of a rotation.
  return 0.5 * (C + C.transpose().inverse());
}

Mat3 propagate_attitude(const Mat3& C, const Vec3& w, double dt) {
  return orthonormalize(C * rodrigues(w * dt));
}

double yaw_of(const Mat3& C) {
  if (std::abs(C(2, 0)) > 1.0 - 1e-9)
    throw ComputationError("yaw undefined: attitude is gimbal-degenerate");
  return std::atan2(C(1, 0), C(0, 0));
}

namespace {

void check_mechanizable(const ImuSequence& seq) {
  if (seq.size() < 2)
    throw StructuralError("mechanization needs at least 2 samples");
  for (std::size_t i = 1; i < seq.size(); ++i)
    if (seq.samples[i].t <= seq.samples[i - 1].t)
      throw StructuralError("non-monotone timestamp at index " +
                            std::to_string(i));
}

}  // namespace

NavSolution mechanize_3d(const ImuSequence& seq, const NavState& init,
                         double gravity) {
  check_mechanizable(seq);
  const Vec3 g_n = gravity_nav(gravity);

  NavSolution nav;
  nav.t.reserve(seq.size());
  nav.states.reserve(seq.size());
  nav.yaw.reserve(seq.size());

  NavState s = init;
  nav.t.push_back(seq.samples[0].t);
  nav.states.push_back(s);
  nav.yaw.push_back(yaw_of(s.C));

  Vec3 a_prev = s.C * seq.samples[0].f + g_n;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const ImuSample& m = seq.samples[i];
    double dt = m.t - seq.samples[i - 1].t;
    Vec3 w_mid = 0.5 * (seq.samples[i - 1].w + m.w);
    Mat3 C_next = propagate_attitude(s.C, w_mid, dt);
    Vec3 a_next = C_next * m.f + g_n;
    Vec3 v_next = s.v + 0.5 * dt * (a_prev + a_next);
    s.p += 0.5 * dt * (s.v + v_next);
    s.v = v_next;
    s.C = C_next;
    a_prev = a_next;
    nav.t.push_back(m.t);
    nav.states.push_back(s);
    nav.yaw.push_back(yaw_of(s.C));
  }
  return nav;
}

NavSolution mechanize_2d(const ImuSequence& seq, const PlanarState& init,
                         double gravity) {
  check_mechanizable(seq);
  (void)gravity;  // gravity has no component in the x-y plane

  NavSolution nav;
  nav.t.reserve(seq.size());
  nav.states.reserve(seq.size());
  nav.yaw.reserve(seq.size());

  auto planar_rotation = [](double psi) {
    Eigen::Matrix2d r;
    r << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
    return r;
  };
  auto push = [&](double t, const Vec2& p, const Vec2& v, double psi) {
    NavState s;
    s.p << p.x(), p.y(), 0.0;
    s.v << v.x(), v.y(), 0.0;
    s.C = Mat3::Identity();
    s.C.topLeftCorner<2, 2>() = planar_rotation(psi);
    nav.t.push_back(t);
    nav.states.push_back(s);
    nav.yaw.push_back(psi);
  };

  Vec2 p = init.p, v = init.v;
  double psi = init.yaw;
  push(seq.samples[0].t, p, v, psi);

  Vec2 a_prev = planar_rotation(psi) * seq.samples[0].f.head<2>();
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const ImuSample& m = seq.samples[i];
    double dt = m.t - seq.samples[i - 1].t;
    double psi_next =
        psi + 0.5 * dt * (seq.samples[i - 1].w.z() + m.w.z());
    Vec2 a_next = planar_rotation(psi_next) * m.f.head<2>();
    Vec2 v_next = v + 0.5 * dt * (a_prev + a_next);
    p += 0.5 * dt * (v + v_next);
    v = v_next;
    psi = psi_next;
    a_prev = a_next;
    push(m.t, p, v, psi);
  }
  return nav;
}

void write_nav_log(std::ostream& out, const NavSolution& nav) {
  out.precision(12);
  out << "t,x,y,z,vx,vy,vz,yaw\n";
  for (std::size_t i = 0; i < nav.t.size(); ++i) {
    const NavState& s = nav.states[i];
    out << nav.t[i] << ',' << s.p.x() << ',' << s.p.y() << ',' << s.p.z()
        << ',' << s.v.x() << ',' << s.v.y() << ',' << s.v.z() << ','
        << nav.yaw[i] << '\n';
  }
}

}  // namespace morpi
