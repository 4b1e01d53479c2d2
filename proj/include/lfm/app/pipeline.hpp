#pragma once

#include "lfm/app/config.hpp"
#include "lfm/app/report.hpp"
#include "lfm/app/scenario.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace lfm::app {

/// Filtering as every stage and experiment runs it (cross covariances tracked).
FilterResult run_filter(const Scenario& scenario, const Vec& theta, const std::vector<Observation>& data);

/// Smoothed means/covariances aligned with `data` (entry k belongs to data[k]).
struct AlignedSmoother {
  std::vector<Vec> means;
  std::vector<Mat> covs;
};
AlignedSmoother align(const SmootherResult& sr, std::size_t n_data);

// Stage artifacts. File names: truth.csv, measurements.csv, filter.csv, filter.json,
// smoother.csv, smoother.json, fit.json, chain.csv, chain.json.
void write_simulation(const std::filesystem::path& dir, const SyntheticRun& run, Eigen::Index dim_y);
void write_filter(const std::filesystem::path& dir, const FilterResult& fr, Eigen::Index dim_y);
void write_smoother(const std::filesystem::path& dir, const SmootherResult& sr, double loglik);
void write_diverged(const std::filesystem::path& dir, const std::string& stage, std::size_t n_steps);

/// The full experiment named by cfg.id.
MetricsReport run_experiment(const ExperimentConfig& cfg);

/// Scenario for replication `rep` of a config (tf: row `pipeline.row`).
std::unique_ptr<Scenario> make_scenario(const ExperimentConfig& cfg, int rep);

enum class Stage { Simulate, Filter, Smooth, Fit, Mcmc };
Stage parse_stage(const std::string& name);

/// Runs one stage in cfg.out_dir. Filter/smooth read measurements.csv (or `data_path`);
/// fit writes fit.json; mcmc starts from fit.json when present. DivergenceError propagates
/// after the summary JSON is written.
void run_pipeline(Stage stage, const ExperimentConfig& cfg, int rep,
                  const std::filesystem::path& data_path = {});

}  // namespace lfm::app
