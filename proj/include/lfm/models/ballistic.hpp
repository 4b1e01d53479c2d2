#pragma once

#include "lfm/ssm.hpp"

namespace lfm::models {

/// One-dimensional reentry: altitude r (m) and downward speed v (m/s).
struct BallisticParams {
  double alpha = 4.49e-4;      ///< drag coefficient (1/m)
  double gamma_air = 1.49e-4;  ///< air density decay (1/m)
  double g = 9.8;              ///< gravity (m/s^2)
  double q_r = 50.0;           ///< altitude noise (m/sqrt(s))
  double q_v = 10.0;           ///< velocity noise ((m/s)/sqrt(s))
  double sensor_x = 30000.0;   ///< m
  double sensor_y = 30.0;      ///< m
  double sigma_n = 30.0;       ///< range noise std (m)

  void validate() const;
};

/// -alpha exp(-gamma_air r) v^2
double drag_accel(const BallisticParams& p, double r, double v);

/// (dr/dt, dv/dt) = (-v, drag + g + u)
Eigen::Vector2d ballistic_drift(const BallisticParams& p, double r, double v, double u);

double range_measurement(const BallisticParams& p, double r);

/// Dispersion diag(q_r, q_v) with unit-intensity Brownian inputs.
MechanisticModel ballistic_mechanistic(const BallisticParams& p);

/// Range to the sensor from state component 0.
MeasurementModel ballistic_measurement(const BallisticParams& p);

}  // namespace lfm::models
