#pragma once

#include "lfm/app/config.hpp"
#include "lfm/app/report.hpp"
#include "lfm/app/scenario.hpp"
#include "lfm/gp_sde.hpp"
#include "lfm/models/tf.hpp"

namespace lfm::app {

struct TfRow {
  models::TfLink link = models::TfLink::Saturation;
  double gamma = 1.0;

  std::string label() const;
};

struct TfSettings {
  std::vector<TfRow> rows;
  Eigen::Index genes = 3;
  Eigen::Index forces = 1;
  double t_end = 15.0;
  int n_obs = 13;
  int grid_points = 363;
  double noise_std = 0.1;
  double nu = 1.5;
  double sigma_m = 1.0;
  double ell = 2.0;
  double x0_var = 1e-4;     ///< prior variance of the known initial levels
  int sim_substeps = 20;    ///< Euler-Maruyama steps per grid interval
  int substeps = 10;        ///< RK4 steps per filtering leg
  double divergence_factor = 3.0;  ///< RMSE > factor * sigma_m counts as diverged
  int write_replications = 1;

  static TfSettings from(const Config& cfg, int default_substeps);
};

/// Evaluation grid merged with the observation times; flags mark which points are which.
struct TfGrid {
  std::vector<double> times;
  std::vector<bool> is_eval;
  std::vector<bool> is_obs;
};

TfGrid tf_grid(const TfSettings& s);

class TfScenario : public Scenario {
 public:
  TfScenario(TfSettings settings, TfRow row, std::uint64_t seed);

  std::string family() const override { return "tf"; }
  Eigen::Index measurement_dim() const override { return settings_.genes; }
  int substeps() const override { return settings_.substeps; }
  estim::ParamSpace parameters() const override;
  Vec true_parameters() const override;
  StateSpaceProblem problem(const Vec& theta) const override;
  SyntheticRun simulate() const override;

  const models::TfParams& params() const { return params_; }
  const TfGrid& grid() const { return grid_; }

 private:
  TfSettings settings_;
  std::uint64_t seed_;
  models::TfParams params_;
  TfGrid grid_;
};

/// Latent-force RMSE of a smoothed run over the evaluation grid.
double tf_force_rmse(const TfScenario& scenario, const SyntheticRun& run, const SmootherResult& sr);

/// All configured (link, gamma) rows; writes summary.csv, metrics.csv, summary.json and the
/// first `write_replications` replications of each row.
MetricsReport run_tf_experiment(const ExperimentConfig& cfg);

/// Master seed of replication `rep` in row `row`.
std::uint64_t tf_replication_seed(std::uint64_t master, std::size_t row, int rep);

}  // namespace lfm::app
