#include "lfm/models/orbit.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace lfm::models {

GravityModel GravityModel::point_mass(double gm, double radius) {
  GravityModel g;
  g.gm = gm;
  g.radius = radius;
  g.n_max = 0;
  g.C = Mat::Ones(1, 1);
  g.S = Mat::Zero(1, 1);
  return g;
}

GravityModel load_gravity_model(const std::string& path, int n_max, double gm, double radius) {
  if (n_max < 0) throw ConfigError("gravity n_max must be >= 0");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gravity coefficient file '" + path + "'");
  GravityModel g;
  g.gm = gm;
  g.radius = radius;
  g.n_max = n_max;
  g.C = Mat::Zero(n_max + 1, n_max + 1);
  g.S = Mat::Zero(n_max + 1, n_max + 1);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_max + 1, n_max + 1, false);

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    int n = 0;
    int m = 0;
    double c = 0.0;
    double s = 0.0;
    if (!(fields >> n >> m >> c >> s) || m < 0 || m > n) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed coefficient line");
    }
    if (n > n_max) continue;
    g.C(n, m) = c;
    g.S(n, m) = s;
    seen(n, m) = true;
  }
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= n; ++m) {
      if (!seen(n, m)) {
        throw ConfigError(path + ": missing coefficient (n=" + std::to_string(n) +
                          ", m=" + std::to_string(m) + ")");
      }
    }
  }
  if (g.C(0, 0) != 1.0) throw ConfigError(path + ": C_00 must be 1");
  return g;
}

Mat legendre_table(int n_max, double sin_phi, double cos_phi) {
  const int size = n_max + 2;
  Mat P = Mat::Zero(size, size);
  P(0, 0) = 1.0;
  for (int m = 0; m < size; ++m) {
    if (m > 0) P(m, m) = (2.0 * m - 1.0) * cos_phi * P(m - 1, m - 1);
    if (m + 1 < size) P(m + 1, m) = (2.0 * m + 1.0) * sin_phi * P(m, m);
    for (int n = m + 2; n < size; ++n) {
      P(n, m) = ((2.0 * n - 1.0) * sin_phi * P(n - 1, m) - (n + m - 1.0) * P(n - 2, m)) / (n - m);
    }
  }
  return P;
}

namespace {

struct Spherical {
  double r;
  double lambda;
  double phi;
};

Spherical to_spherical(const Vector3& x) {
  const double r = x.norm();
  if (!(r > 0.0)) throw ConfigError("gravity evaluated at the origin");
  return {r, std::atan2(x.y(), x.x()), std::asin(x.z() / r)};
}

}  // namespace

double gravity_potential(const GravityModel& gm, const Vector3& r_fixed) {
  const Spherical s = to_spherical(r_fixed);
  const Mat P = legendre_table(gm.n_max, std::sin(s.phi), std::cos(s.phi));
  double sum = 0.0;
  double ratio = 1.0;
  for (int n = 0; n <= gm.n_max; ++n) {
    double inner = 0.0;
    for (int m = 0; m <= n; ++m) {
      inner += P(n, m) * (gm.C(n, m) * std::cos(m * s.lambda) + gm.S(n, m) * std::sin(m * s.lambda));
    }
    sum += ratio * inner;
    ratio *= gm.radius / s.r;
  }
  return gm.gm / s.r * sum;
}

SphericalGradient gravity_gradient_spherical(const GravityModel& gm, double r, double lambda,
                                             double phi) {
  if (!(r > 0.0)) throw ConfigError("gravity evaluated at the origin");
  const double sp = std::sin(phi);
  const double cp = std::cos(phi);
  const double tp = sp / cp;
  const Mat P = legendre_table(gm.n_max, sp, cp);
  SphericalGradient g;
  double ratio = 1.0;
  for (int n = 0; n <= gm.n_max; ++n) {
    double sum_r = 0.0;
    double sum_phi = 0.0;
    double sum_lambda = 0.0;
    for (int m = 0; m <= n; ++m) {
      const double cm = std::cos(m * lambda);
      const double sm = std::sin(m * lambda);
      const double trig = gm.C(n, m) * cm + gm.S(n, m) * sm;
      sum_r += P(n, m) * trig;
      // d P_nm(sin phi) / d phi = P_{n,m+1} - m tan(phi) P_nm
      sum_phi += (P(n, m + 1) - m * tp * P(n, m)) * trig;
      sum_lambda += m * P(n, m) * (gm.S(n, m) * cm - gm.C(n, m) * sm);
    }
    g.d_r += -(n + 1.0) * ratio * sum_r;
    g.d_phi += ratio * sum_phi;
    g.d_lambda += ratio * sum_lambda;
    ratio *= gm.radius / r;
  }
  g.d_r *= gm.gm / (r * r);
  g.d_phi *= gm.gm / r;
  g.d_lambda *= gm.gm / r;
  return g;
}

Vector3 gravity_accel_fixed(const GravityModel& gm, const Vector3& r_fixed) {
  const Spherical s = to_spherical(r_fixed);
  const SphericalGradient g = gravity_gradient_spherical(gm, s.r, s.lambda, s.phi);
  const double sp = std::sin(s.phi);
  const double cp = std::cos(s.phi);
  const double sl = std::sin(s.lambda);
  const double cl = std::cos(s.lambda);
  const Vector3 e_r(cp * cl, cp * sl, sp);
  const Vector3 e_phi(-sp * cl, -sp * sl, cp);
  const Vector3 e_lambda(-sl, cl, 0.0);
  return g.d_r * e_r + g.d_phi / s.r * e_phi + g.d_lambda / (s.r * cp) * e_lambda;
}

Vector3 gravity_accel(const GravityModel& gm, const Vector3& r_inertial, const Matrix3& R) {
  return R.transpose() * gravity_accel_fixed(gm, R * r_inertial);
}

Vector3 third_body_accel(double gm, const Vector3& r_cb, const Vector3& r) {
  const Vector3 d = r_cb - r;
  const double dn = d.norm();
  const double cn = r_cb.norm();
  if (!(dn > 0.0) || !(cn > 0.0)) throw ConfigError("singular third-body configuration");
  return gm * (d / (dn * dn * dn) - r_cb / (cn * cn * cn));
}

Vector3 srp_accel(double alpha, double au, const Vector3& r, const Vector3& r_sun_pos) {
  const Vector3 d = r_sun_pos - r;
  const double dist = d.norm();
  if (!(dist > 0.0)) throw ConfigError("satellite coincides with the Sun");
  return -alpha * (au * au) / (dist * dist) * (d / dist);
}

Matrix3 rtn_basis(const Vector3& r, const Vector3& v) {
  const double rn = r.norm();
  const Vector3 h = r.cross(v);
  const double hn = h.norm();
  if (!(rn > 0.0) || !(hn > 1e-12 * rn * v.norm()) || !(hn > 0.0)) {
    throw ConfigError("RTN basis undefined for zero position or radial velocity");
  }
  const Vector3 e_r = r / rn;
  const Vector3 e_n = h / hn;
  const Vector3 e_t = e_n.cross(e_r);
  Matrix3 B;
  B.col(0) = e_r;
  B.col(1) = e_t;
  B.col(2) = e_n;
  return B;
}

Vector3 AnalyticEphemeris::sun(double t) const {
  const double lon = sun_longitude0 + 2.0 * M_PI * t / sun_period;
  const Vector3 ecl(sun_distance * std::cos(lon), sun_distance * std::sin(lon), 0.0);
  return Eigen::AngleAxisd(obliquity, Vector3::UnitX()) * ecl;
}

Vector3 AnalyticEphemeris::moon(double t) const {
  const double u = moon_argument0 + 2.0 * M_PI * t / moon_period;
  const Vector3 orbital(moon_distance * std::cos(u), moon_distance * std::sin(u), 0.0);
  const Vector3 ecl = Eigen::AngleAxisd(moon_node, Vector3::UnitZ()) *
                      (Eigen::AngleAxisd(moon_inclination, Vector3::UnitX()) * orbital);
  return Eigen::AngleAxisd(obliquity, Vector3::UnitX()) * ecl;
}

Matrix3 OrbitEnvironment::inertial_to_fixed(double t) const {
  const double theta = earth_angle0 + earth_rate * t;
  // Fixed coordinates of an inertial vector: rotate by -theta about z.
  return Eigen::AngleAxisd(-theta, Vector3::UnitZ()).toRotationMatrix();
}

Vector3 OrbitEnvironment::accel(const Vector3& r, double t) const {
  Vector3 a = gravity.n_max == 0 ? Vector3(-gravity.gm * r / std::pow(r.norm(), 3))
                                 : gravity_accel(gravity, r, inertial_to_fixed(t));
  if (third_body || srp) {
    const Vector3 sun = ephemeris.sun(t);
    if (third_body) {
      a += third_body_accel(gm_moon, ephemeris.moon(t), r);
      a += third_body_accel(gm_sun, sun, r);
    }
    if (srp) a += srp_accel(srp_alpha, au, r, sun);
  }
  return a;
}

Vector6 orbit_drift(const OrbitEnvironment& env, double t, const Vector6& state,
                    const Vector3& u_rtn) {
  const Vector3 r = state.head<3>();
  const Vector3 v = state.tail<3>();
  Vector6 out;
  out.head<3>() = v;
  out.tail<3>() = env.accel(r, t);
  if (!u_rtn.isZero(0.0)) out.tail<3>() += rtn_basis(r, v) * u_rtn;
  return out;
}

MechanisticModel orbit_mechanistic(const OrbitEnvironment& env, double force_unit) {
  MechanisticModel mech;
  mech.dim_x = 6;
  mech.n_forces = 3;
  mech.drift = [env, force_unit](const Vec& x, const Vec& u, double t) -> Vec {
    const Vector6 s = x;
    const Vector3 f = u.size() == 3 ? Vector3(force_unit * u) : Vector3::Zero();
    return orbit_drift(env, t, s, f);
  };
  mech.input_gain = [force_unit](const Vec& x, double) -> Mat {
    Mat G = Mat::Zero(6, 3);
    G.bottomRows(3) = force_unit * rtn_basis(x.head<3>(), x.tail<3>());
    return G;
  };
  mech.state_dependent_dispersion = true;
  return mech;
}

MeasurementModel orbit_measurement(Eigen::Index dim, double sigma_pos, double sigma_vel) {
  if (!(sigma_pos > 0.0) || !(sigma_vel > 0.0)) throw ConfigError("orbit noise must be > 0");
  Mat H = Mat::Zero(6, dim);
  H.leftCols(6).setIdentity();
  Vec r(6);
  r << Vec::Constant(3, sigma_pos * sigma_pos), Vec::Constant(3, sigma_vel * sigma_vel);
  return MeasurementModel::linear(H, r.asDiagonal());
}

Vector6 kepler_to_cartesian(const KeplerElements& el, double gm) {
  // Solve Kepler's equation for the eccentric anomaly.
  double E = el.mean_anomaly;
  for (int i = 0; i < 50; ++i) {
    const double dE = (E - el.e * std::sin(E) - el.mean_anomaly) / (1.0 - el.e * std::cos(E));
    E -= dE;
    if (std::abs(dE) < 1e-15) break;
  }
  const double cE = std::cos(E);
  const double sE = std::sin(E);
  const double fac = std::sqrt(1.0 - el.e * el.e);
  const double r = el.a * (1.0 - el.e * cE);
  const Vector3 pos_pf(el.a * (cE - el.e), el.a * fac * sE, 0.0);
  const double vscale = std::sqrt(gm * el.a) / r;
  const Vector3 vel_pf(-vscale * sE, vscale * fac * cE, 0.0);
  const Matrix3 Rot = (Eigen::AngleAxisd(el.raan, Vector3::UnitZ()) *
                       Eigen::AngleAxisd(el.i, Vector3::UnitX()) *
                       Eigen::AngleAxisd(el.argp, Vector3::UnitZ()))
                          .toRotationMatrix();
  Vector6 x;
  x.head<3>() = Rot * pos_pf;
  x.tail<3>() = Rot * vel_pf;
  return x;
}

Vector6 propagate_orbit(const OrbitEnvironment& env, const Vector6& x0, double t0, double t1,
                        int steps, const std::function<Vector3(double, const Vector6&)>& u_rtn) {
  if (steps < 1) throw ConfigError("orbit propagation needs at least one step");
  const double h = (t1 - t0) / steps;
  auto f = [&](double t, const Vector6& x) -> Vector6 {
    return orbit_drift(env, t, x, u_rtn ? u_rtn(t, x) : Vector3::Zero());
  };
  Vector6 x = x0;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    const Vector6 k1 = f(t, x);
    const Vector6 k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Vector6 k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Vector6 k4 = f(t + h, x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw DivergenceError("orbit integration blow-up", t + h);
  }
  return x;
}

double orbital_energy(const Vector6& x, double gm) {
  return 0.5 * x.tail<3>().squaredNorm() - gm / x.head<3>().norm();
}

}  // namespace lfm::models
