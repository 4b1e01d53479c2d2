#pragma once

#include "lfm/ssm.hpp"

#include <Eigen/Geometry>

#include <functional>
#include <string>

namespace lfm::models {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

inline constexpr double kGmEarth = 3.986004418e14;     // m^3/s^2
inline constexpr double kEarthRadius = 6378136.3;      // m
inline constexpr double kGmMoon = 4.9028e12;           // m^3/s^2
inline constexpr double kGmSun = 1.32712440018e20;     // m^3/s^2
inline constexpr double kAstronomicalUnit = 1.495978707e11;  // m
inline constexpr double kEarthRotationRate = 7.2921158553e-5;  // rad/s
inline constexpr double kSiderealDay = 86164.0905;     // s

/// Unnormalized spherical-harmonic gravity field truncated at degree/order n_max.
struct GravityModel {
  double gm = kGmEarth;
  double radius = kEarthRadius;
  int n_max = 0;
  Mat C;  ///< (n_max+1) x (n_max+1), C(n, m) for m <= n
  Mat S;

  static GravityModel point_mass(double gm = kGmEarth, double radius = kEarthRadius);
};

/// Reads `n m C_nm S_nm` lines ('#' comments) up to n_max. Every (n, m) with m <= n <= n_max
/// must be present and C_00 must equal 1.
GravityModel load_gravity_model(const std::string& path, int n_max, double gm = kGmEarth,
                                double radius = kEarthRadius);

/// Unnormalized associated Legendre functions P_nm(sin(phi)) without the Condon-Shortley
/// phase; the returned matrix is (n_max+2) x (n_max+2) with zeros for m > n.
Mat legendre_table(int n_max, double sin_phi, double cos_phi);

double gravity_potential(const GravityModel& gm, const Vector3& r_fixed);

struct SphericalGradient {
  double d_r = 0.0;
  double d_phi = 0.0;
  double d_lambda = 0.0;
};

/// Partial derivatives of U with respect to radius, latitude and longitude.
SphericalGradient gravity_gradient_spherical(const GravityModel& gm, double r, double lambda,
                                             double phi);

/// Gradient of U in the Earth-fixed frame.
Vector3 gravity_accel_fixed(const GravityModel& gm, const Vector3& r_fixed);

/// R^{-1} grad U(R r) for an inertial position r and inertial-to-fixed rotation R.
Vector3 gravity_accel(const GravityModel& gm, const Vector3& r_inertial, const Matrix3& R);

/// Tidal acceleration of a body with parameter GM at r_cb on a satellite at r.
Vector3 third_body_accel(double gm, const Vector3& r_cb, const Vector3& r);

/// -alpha (AU / |r_sun - r|)^2 e_sun, e_sun the unit vector from the satellite to the Sun.
Vector3 srp_accel(double alpha, double au, const Vector3& r, const Vector3& r_sun_pos);

/// Columns e_R, e_T, e_N; the matrix maps RTN components to the inertial frame.
Matrix3 rtn_basis(const Vector3& r, const Vector3& v);

/// Circular analytic positions of the Sun and Moon in the Earth-centred inertial frame.
struct AnalyticEphemeris {
  double obliquity = 23.43929 * 3.14159265358979323846 / 180.0;
  double sun_distance = kAstronomicalUnit;
  double sun_period = 365.25636 * 86400.0;
  double sun_longitude0 = 0.0;  ///< ecliptic longitude at t = 0 (rad)
  double moon_distance = 384400.0e3;
  double moon_period = 27.321661 * 86400.0;
  double moon_inclination = 5.145 * 3.14159265358979323846 / 180.0;  ///< to the ecliptic
  double moon_node = 0.0;       ///< ascending node longitude (rad)
  double moon_argument0 = 0.0;  ///< argument of latitude at t = 0 (rad)

  Vector3 sun(double t) const;
  Vector3 moon(double t) const;
};

struct OrbitEnvironment {
  GravityModel gravity = GravityModel::point_mass();
  double gm_moon = kGmMoon;
  double gm_sun = kGmSun;
  double srp_alpha = 0.0;
  double au = kAstronomicalUnit;
  double earth_rate = kEarthRotationRate;
  double earth_angle0 = 0.0;
  bool third_body = false;
  bool srp = false;
  AnalyticEphemeris ephemeris;

  /// Inertial-to-Earth-fixed rotation about z at time t.
  Matrix3 inertial_to_fixed(double t) const;

  /// Deterministic acceleration a_g + a_moon + a_sun + a_srp.
  Vector3 accel(const Vector3& r, double t) const;
};

using Vector6 = Eigen::Matrix<double, 6, 1>;

/// (dr/dt, dv/dt) = (v, a(r, t) + R(r, v) u_rtn)
Vector6 orbit_drift(const OrbitEnvironment& env, double t, const Vector6& state,
                    const Vector3& u_rtn);

/// Orbit dynamics with three RTN force inputs measured in units of `force_unit` m/s^2.
MechanisticModel orbit_mechanistic(const OrbitEnvironment& env, double force_unit);

/// Position and velocity observed with independent noise.
MeasurementModel orbit_measurement(Eigen::Index dim, double sigma_pos, double sigma_vel);

struct KeplerElements {
  double a = 26560.0e3;
  double e = 0.0;
  double i = 55.0 * 3.14159265358979323846 / 180.0;
  double raan = 0.0;
  double argp = 0.0;
  double mean_anomaly = 0.0;
};

Vector6 kepler_to_cartesian(const KeplerElements& el, double gm = kGmEarth);

/// Classical RK4 with a deterministic RTN force u_rtn(t) (m/s^2).
Vector6 propagate_orbit(const OrbitEnvironment& env, const Vector6& x0, double t0, double t1,
                        int steps, const std::function<Vector3(double, const Vector6&)>& u_rtn = {});

double orbital_energy(const Vector6& x, double gm = kGmEarth);

}  // namespace lfm::models
