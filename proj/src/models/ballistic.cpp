#include "lfm/models/ballistic.hpp"

#include <cmath>

namespace lfm::models {

void BallisticParams::validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("ballistic alpha must be >= 0");
  if (!(gamma_air >= 0.0)) throw ConfigError("ballistic gamma_air must be >= 0");
  if (!(q_r >= 0.0) || !(q_v >= 0.0)) throw ConfigError("ballistic noise densities must be >= 0");
  if (!(sigma_n > 0.0)) throw ConfigError("ballistic range noise must be > 0");
}

double drag_accel(const BallisticParams& p, double r, double v) {
  return -p.alpha * std::exp(-p.gamma_air * r) * v * v;
}

Eigen::Vector2d ballistic_drift(const BallisticParams& p, double r, double v, double u) {
  return {-v, drag_accel(p, r, v) + p.g + u};
}

double range_measurement(const BallisticParams& p, double r) {
  return std::hypot(p.sensor_x, p.sensor_y - r);
}

MechanisticModel ballistic_mechanistic(const BallisticParams& p) {
  p.validate();
  MechanisticModel mech;
  mech.dim_x = 2;
  mech.n_forces = 1;
  mech.drift = [p](const Vec& x, const Vec& u, double) -> Vec {
    return ballistic_drift(p, x(0), x(1), u.size() > 0 ? u(0) : 0.0);
  };
  const Mat L = Eigen::Vector2d(p.q_r, p.q_v).asDiagonal();
  mech.dispersion = [L](const Vec&, double) -> Mat { return L; };
  mech.q = Vec::Ones(2);
  mech.input_gain = [](const Vec&, double) -> Mat { return Eigen::Vector2d(0.0, 1.0); };
  return mech;
}

MeasurementModel ballistic_measurement(const BallisticParams& p) {
  MeasurementModel meas;
  meas.h = [p](const Vec& x) -> Vec { return Vec::Constant(1, range_measurement(p, x(0))); };
  meas.R = Mat::Constant(1, 1, p.sigma_n * p.sigma_n);
  return meas;
}

}  // namespace lfm::models
