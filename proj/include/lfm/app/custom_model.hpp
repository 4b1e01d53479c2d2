#pragma once

#include "lfm/app/config.hpp"
#include "lfm/app/report.hpp"
#include "lfm/app/scenario.hpp"
#include "lfm/gp_sde.hpp"

namespace lfm::app {

/// Matérn GP observed directly in Gaussian noise: the linear-Gaussian sanity model.
struct CustomSettings {
  double nu = 0.5;
  double sigma = 1.0;
  double ell = 1.0;
  double noise_std = 0.1;
  int n_obs = 200;
  double dt = 0.5;
  int sim_substeps = 20;
  int substeps = 10;

  static CustomSettings from(const Config& cfg, int default_substeps);
};

class CustomScenario : public Scenario {
 public:
  CustomScenario(CustomSettings settings, std::uint64_t seed);

  std::string family() const override { return "custom"; }
  Eigen::Index measurement_dim() const override { return 1; }
  int substeps() const override { return settings_.substeps; }
  /// (sigma, ell, noise_std)
  estim::ParamSpace parameters() const override;
  Vec true_parameters() const override;
  StateSpaceProblem problem(const Vec& theta) const override;
  SyntheticRun simulate() const override;

 private:
  CustomSettings settings_;
  std::uint64_t seed_;
};

/// Per replication: simulate, fit (sigma, ell, noise_std), smooth at the fit.
MetricsReport run_custom_experiment(const ExperimentConfig& cfg);

}  // namespace lfm::app
