#pragma once

#include "lfm/app/config.hpp"
#include "lfm/app/report.hpp"
#include "lfm/app/scenario.hpp"
#include "lfm/models/orbit.hpp"

#include <array>

namespace lfm::app {

struct OrbitSettings {
  std::string gravity_file;  ///< empty: point-mass gravity
  int n_max = 8;
  bool third_body = true;
  bool srp = true;
  double srp_alpha = 1e-7;   ///< m/s^2

  models::KeplerElements elements;  ///< raan and mean anomaly are drawn per scenario
  double obs_days = 2.0;
  double pred_days = 8.0;
  double obs_interval = 900.0;   ///< s
  double sigma_pos = 0.05;       ///< m
  double sigma_vel = 1e-4;       ///< m/s

  double f0 = 1.0 / models::kSiderealDay;  ///< Hz
  std::array<int, 3> harmonics{7, 7, 10};  ///< R, T, N
  double force_unit = 1e-9;   ///< m/s^2 per force-state unit
  double prior_std = 3.0;     ///< oscillator amplitude prior (force units)
  double bias_std = 3.0;      ///< constant-force prior (force units)
  double amplitude_rate = 1e-6;  ///< coefficient variance growth per second (force units^2 / s)
  double q_eps = 1e-2;        ///< residual force noise density (force units^2 s)

  double inject_std = 3.0;    ///< injected oscillator amplitudes (force units)
  double inject_bias_std = 3.0;
  std::array<int, 3> inject_harmonics{7, 7, 10};

  int substeps = 80;            ///< RK4 steps per observation interval
  double predict_step = 60.0;   ///< s, both predictors
  double report_interval = 3600.0;
  double truth_step = 10.0;     ///< s
  double success_ratio = 0.5;   ///< LFM/deterministic end-of-window error target

  static OrbitSettings from(const Config& cfg, int default_substeps);
  models::OrbitEnvironment environment() const;
};

/// Injected RTN force: bias plus harmonics of f0, in force units.
struct InjectedForce {
  double f0 = 0.0;
  std::array<double, 3> bias{};
  std::array<std::vector<double>, 3> cos_coef;
  std::array<std::vector<double>, 3> sin_coef;

  models::Vector3 operator()(double t) const;
};

class OrbitScenario : public Scenario {
 public:
  OrbitScenario(OrbitSettings settings, std::uint64_t seed);

  std::string family() const override { return "orbit"; }
  Eigen::Index measurement_dim() const override { return 6; }
  int substeps() const override { return settings_.substeps; }
  estim::ParamSpace parameters() const override { return {}; }
  Vec true_parameters() const override { return Vec(0); }
  StateSpaceProblem problem(const Vec& theta) const override;
  /// Truth (orbit states only, padded with the force coefficients' resonator states) at the
  /// observation times.
  SyntheticRun simulate() const override;

  const OrbitSettings& settings() const { return settings_; }
  const models::OrbitEnvironment& environment() const { return env_; }
  const InjectedForce& force() const { return force_; }
  const models::Vector6& initial_state() const { return x0_; }
  const Vec& prior_mean() const { return prior_mean_; }

 private:
  OrbitSettings settings_;
  std::uint64_t seed_;
  models::OrbitEnvironment env_;
  models::Vector6 x0_;
  Vec prior_mean_;  ///< orbit part of the filter prior mean
  InjectedForce force_;
};

struct OrbitPrediction {
  std::vector<double> times;  ///< prediction-window report times
  std::vector<double> err_lfm;
  std::vector<double> err_det;
  double loglik = 0.0;

  double ratio() const { return err_lfm.back() / err_det.back(); }
};

/// Filter the observation window, then predict with both the LFM and the force-free model.
OrbitPrediction run_orbit_prediction(const OrbitScenario& scenario);

/// Per scenario: errors.csv (t,err_lfm,err_det) plus metrics and summary.
MetricsReport run_orbit_experiment(const ExperimentConfig& cfg);

}  // namespace lfm::app
