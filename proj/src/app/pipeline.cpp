#include "lfm/app/pipeline.hpp"

#include "lfm/app/ballistic_experiment.hpp"
#include "lfm/app/custom_model.hpp"
#include "lfm/app/orbit_experiment.hpp"
#include "lfm/app/tf_experiment.hpp"
#include "lfm/io.hpp"

#include <cmath>

namespace lfm::app {
namespace {

Vec theta_from_fit(const std::filesystem::path& path, const estim::ParamSpace& space) {
  const nlohmann::json j = io::read_json_file(path);
  const auto names = space.names();
  Vec theta(static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!j.contains("parameters") || !j["parameters"].contains(names[i]) || !j["parameters"][names[i]].is_number()) {
      throw ConfigError(path.string() + ": missing parameter '" + names[i] + "'");
    }
    theta(static_cast<Eigen::Index>(i)) = j["parameters"][names[i]].get<double>();
  }
  return theta;
}

Vec configured_theta(const ExperimentConfig& cfg, const Scenario& scenario) {
  const std::string source = cfg.raw.get_string("pipeline.theta", "true");
  if (source == "true") return scenario.true_parameters();
  if (source == "fit") return theta_from_fit(cfg.out_dir / "fit.json", scenario.parameters());
  throw ConfigError(cfg.raw.origin() + ": pipeline.theta must be 'true' or 'fit'");
}

std::vector<Observation> read_data(const ExperimentConfig& cfg, const std::filesystem::path& data_path,
                                   Eigen::Index dim_y) {
  const auto path = data_path.empty() ? cfg.out_dir / "measurements.csv" : data_path;
  const io::CsvTable table = io::read_csv(path);
  if (static_cast<Eigen::Index>(table.header.size()) != dim_y + 1) {
    throw ConfigError(path.string() + ": expected " + std::to_string(dim_y) + " measurement columns");
  }
  return io::observations_from_table(table, path.string());
}

Vec config_vec(const Config& cfg, const std::string& key, const Vec& fallback) {
  std::vector<double> def(fallback.data(), fallback.data() + fallback.size());
  const auto v = cfg.get_doubles(key, def);
  if (static_cast<Eigen::Index>(v.size()) != fallback.size()) {
    throw ConfigError(cfg.origin() + ": " + key + " needs " + std::to_string(fallback.size()) + " values");
  }
  return Eigen::Map<const Vec>(v.data(), fallback.size());
}

}  // namespace

FilterResult run_filter(const Scenario& scenario, const Vec& theta, const std::vector<Observation>& data) {
  const StateSpaceProblem p = scenario.problem(theta);
  return filter(p.model, p.meas, data, p.x0, {scenario.substeps(), true});
}

AlignedSmoother align(const SmootherResult& sr, std::size_t n_data) {
  if (sr.means.size() != n_data + 1) throw DimensionError("smoother result does not match the data grid");
  AlignedSmoother out;
  out.means.assign(sr.means.begin() + 1, sr.means.end());
  out.covs.assign(sr.covs.begin() + 1, sr.covs.end());
  return out;
}

void write_simulation(const std::filesystem::path& dir, const SyntheticRun& run, Eigen::Index dim_y) {
  io::write_csv_file(dir / "truth.csv", io::trajectory_table(run.truth));
  io::write_csv_file(dir / "measurements.csv", io::observations_table(run.data, dim_y));
}

void write_filter(const std::filesystem::path& dir, const FilterResult& fr, Eigen::Index dim_y) {
  io::write_csv_file(dir / "filter.csv", io::filter_table(fr, dim_y));
  io::write_json_file(dir / "filter.json", io::run_summary(fr.loglik, fr.steps.size(), false));
}

void write_smoother(const std::filesystem::path& dir, const SmootherResult& sr, double loglik) {
  io::write_csv_file(dir / "smoother.csv", io::smoother_table(sr));
  nlohmann::json j = io::run_summary(loglik, sr.times.size(), false);
  j["max_trace_excess"] = sr.max_trace_excess;
  io::write_json_file(dir / "smoother.json", j);
}

void write_diverged(const std::filesystem::path& dir, const std::string& stage, std::size_t n_steps) {
  io::write_json_file(dir / (stage + ".json"),
                      io::run_summary(-std::numeric_limits<double>::infinity(), n_steps, true));
}

std::unique_ptr<Scenario> make_scenario(const ExperimentConfig& cfg, int rep) {
  if (rep < 0) throw ConfigError("replication index must be >= 0");
  const auto r = static_cast<std::uint64_t>(rep);
  if (cfg.id == "tf") {
    const TfSettings s = TfSettings::from(cfg.raw, cfg.substeps);
    const auto row = static_cast<std::size_t>(cfg.raw.get_int("pipeline.row", 0));
    if (row >= s.rows.size()) throw ConfigError(cfg.raw.origin() + ": pipeline.row is out of range");
    return std::make_unique<TfScenario>(s, s.rows[row], tf_replication_seed(cfg.seed, row, rep));
  }
  if (cfg.id == "ballistic") {
    return std::make_unique<BallisticScenario>(BallisticSettings::from(cfg.raw, cfg.substeps), derive_seed(cfg.seed, r));
  }
  if (cfg.id == "custom") {
    return std::make_unique<CustomScenario>(CustomSettings::from(cfg.raw, cfg.substeps), derive_seed(cfg.seed, r));
  }
  if (cfg.id == "orbit") {
    return std::make_unique<OrbitScenario>(OrbitSettings::from(cfg.raw, static_cast<int>(cfg.raw.get_int("orbit.substeps", 80))),
                                           derive_seed(cfg.seed, r));
  }
  throw ConfigError("unknown experiment '" + cfg.id + "'");
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.id == "tf") return run_tf_experiment(cfg);
  if (cfg.id == "ballistic") return run_ballistic_experiment(cfg);
  if (cfg.id == "orbit") return run_orbit_experiment(cfg);
  if (cfg.id == "custom") return run_custom_experiment(cfg);
  throw ConfigError("unknown experiment '" + cfg.id + "'");
}

Stage parse_stage(const std::string& name) {
  if (name == "simulate") return Stage::Simulate;
  if (name == "filter") return Stage::Filter;
  if (name == "smooth") return Stage::Smooth;
  if (name == "fit") return Stage::Fit;
  if (name == "mcmc") return Stage::Mcmc;
  throw ConfigError("unknown pipeline stage '" + name + "'");
}

void run_pipeline(Stage stage, const ExperimentConfig& cfg, int rep, const std::filesystem::path& data_path) {
  const auto scenario = make_scenario(cfg, rep);
  const auto& dir = cfg.out_dir;
  const Eigen::Index dim_y = scenario->measurement_dim();

  if (stage == Stage::Simulate) {
    write_simulation(dir, scenario->simulate(), dim_y);
    return;
  }

  const std::vector<Observation> data = read_data(cfg, data_path, dim_y);
  const auto space = scenario->parameters();
  const auto names = space.names();
  if ((stage == Stage::Fit || stage == Stage::Mcmc) && names.empty()) {
    throw ConfigError("the " + cfg.id + " experiment has no free parameters to fit or sample");
  }
  const ProblemBuilder builder = [&](const Vec& th) { return scenario->problem(th); };
  const auto loglik = [&](const Vec& th) { return log_marginal(builder, data, th, scenario->substeps()); };
  const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));

  switch (stage) {
    case Stage::Filter:
    case Stage::Smooth: {
      const std::string name = stage == Stage::Filter ? "filter" : "smoother";
      FilterResult fr;
      try {
        fr = run_filter(*scenario, configured_theta(cfg, *scenario), data);
      } catch (const DivergenceError&) {
        write_diverged(dir, name, data.size());
        throw;
      }
      write_filter(dir, fr, dim_y);
      if (stage == Stage::Smooth) {
        try {
          write_smoother(dir, smooth(fr), fr.loglik);
        } catch (const DivergenceError&) {
          write_diverged(dir, name, data.size());
          throw;
        }
      }
      return;
    }
    case Stage::Fit: {
      estim::MaximizeOptions opt;
      opt.max_evaluations = static_cast<int>(cfg.raw.get_int("fit.max_evaluations", opt.max_evaluations));
      opt.restarts = static_cast<int>(cfg.raw.get_int("fit.restarts", opt.restarts));
      opt.seed = derive_seed(seed, 3);
      const Vec start = config_vec(cfg.raw, "fit.start", scenario->true_parameters());
      const auto fit = estim::maximize(loglik, space, start, opt);
      nlohmann::json j;
      for (std::size_t i = 0; i < names.size(); ++i) j["parameters"][names[i]] = fit.theta(static_cast<Eigen::Index>(i));
      j["loglik"] = std::isfinite(fit.value) ? nlohmann::json(fit.value) : nlohmann::json(nullptr);
      j["converged"] = fit.converged;
      j["on_boundary"] = fit.on_boundary;
      j["evaluations"] = fit.evaluations;
      io::write_json_file(dir / "fit.json", j);
      if (!std::isfinite(fit.value)) {
        throw DivergenceError("fit divergence", std::numeric_limits<double>::quiet_NaN(),
                              "no finite likelihood value found");
      }
      return;
    }
    case Stage::Mcmc: {
      const Vec start = std::filesystem::exists(dir / "fit.json") ? theta_from_fit(dir / "fit.json", space)
                                                                  : scenario->true_parameters();
      const int n = static_cast<int>(cfg.raw.get_int("mcmc.samples", 2000));
      const Vec step = config_vec(cfg.raw, "mcmc.step", Vec::Constant(start.size(), 0.1));
      const double burn = cfg.raw.get_double("mcmc.burn_in", 0.05);
      if (n < 1) throw ConfigError(cfg.raw.origin() + ": mcmc.samples must be >= 1");
      const auto chain = estim::rw_metropolis(loglik, space, start, n, step, derive_seed(seed, 4));
      io::write_csv_file(dir / "chain.csv", io::chain_table(chain, names));
      io::write_json_file(dir / "chain.json", io::chain_summary(chain, names, burn));
      return;
    }
    case Stage::Simulate:
      break;
  }
}

}  // namespace lfm::app
