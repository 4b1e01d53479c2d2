#pragma once

#include "lfm/app/config.hpp"
#include "lfm/app/report.hpp"
#include "lfm/app/scenario.hpp"
#include "lfm/models/ballistic.hpp"

namespace lfm::app {

struct BallisticSettings {
  models::BallisticParams params;
  double r0 = 65000.0;
  double v0 = 3000.0;
  double prior_std_r = 100.0;
  double prior_std_v = 10.0;
  double t_end = 30.0;
  int n_meas = 120;
  int refine = 10;          ///< evaluation grid points per measurement interval
  double nu = 2.5;
  double sigma_m = 50.0;
  double ell = 5.0;
  int sim_substeps = 10;    ///< Euler-Maruyama steps per evaluation-grid interval
  int substeps = 1;         ///< RK4 steps per evaluation-grid interval
  int likelihood_substeps = 2;  ///< RK4 steps per measurement interval for fit/mcmc
  bool range_measurement = true;  ///< false: altitude observed directly

  bool fit = true;
  Vec fit_start;            ///< (alpha, sigma_m, ell)
  int fit_evaluations = 300;
  bool coverage_at_fit = false;

  int mcmc_samples = 3000;
  Vec mcmc_step;            ///< proposal std on the log scale
  double burn_in = 0.05;
  int write_replications = 1;

  static BallisticSettings from(const Config& cfg, int default_substeps);
};

class BallisticScenario : public Scenario {
 public:
  BallisticScenario(BallisticSettings settings, std::uint64_t seed);

  std::string family() const override { return "ballistic"; }
  Eigen::Index measurement_dim() const override { return 1; }
  int substeps() const override { return settings_.substeps; }
  /// (alpha, sigma_m, ell)
  estim::ParamSpace parameters() const override;
  Vec true_parameters() const override;
  StateSpaceProblem problem(const Vec& theta) const override;
  SyntheticRun simulate() const override;

  const BallisticSettings& settings() const { return settings_; }
  std::uint64_t seed() const { return seed_; }

 private:
  BallisticSettings settings_;
  std::uint64_t seed_;
};

/// Smoothed 95% bands for r, v and u next to the truth: t,r_true,r_mean,r_std,v_true,...
io::CsvTable ballistic_bands(const BallisticScenario& scenario, const SyntheticRun& run,
                             const SmootherResult& sr, const Vec& theta);

/// Simulate, optionally fit and run MCMC, smooth and score coverage on the evaluation grid.
MetricsReport run_ballistic_experiment(const ExperimentConfig& cfg);

}  // namespace lfm::app
