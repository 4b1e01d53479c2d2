#include "lfm/app/custom_model.hpp"

#include "lfm/app/pipeline.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace lfm::app {

CustomSettings CustomSettings::from(const Config& cfg, int default_substeps) {
  CustomSettings s;
  s.nu = cfg.get_double("custom.nu", s.nu);
  s.sigma = cfg.get_double("custom.sigma", s.sigma);
  s.ell = cfg.get_double("custom.ell", s.ell);
  s.noise_std = cfg.get_double("custom.noise_std", s.noise_std);
  s.n_obs = static_cast<int>(cfg.get_int("custom.n_obs", s.n_obs));
  s.dt = cfg.get_double("custom.dt", s.dt);
  s.sim_substeps = static_cast<int>(cfg.get_int("custom.sim_substeps", s.sim_substeps));
  s.substeps = static_cast<int>(cfg.get_int("custom.substeps", default_substeps));
  make_matern(s.nu, s.sigma, s.ell).validate();
  if (!(s.noise_std > 0.0)) throw ConfigError(cfg.origin() + ": custom.noise_std must be > 0");
  if (s.n_obs < 1 || !(s.dt > 0.0)) throw ConfigError(cfg.origin() + ": custom.n_obs/dt must be positive");
  if (s.sim_substeps < 1 || s.substeps < 1) throw ConfigError(cfg.origin() + ": substeps must be >= 1");
  return s;
}

CustomScenario::CustomScenario(CustomSettings settings, std::uint64_t seed)
    : settings_(settings), seed_(seed) {}

estim::ParamSpace CustomScenario::parameters() const {
  estim::ParamSpace space;
  space.add("sigma", 1e-3, 1e3);
  space.add("ell", 1e-3, 1e3);
  space.add("noise_std", 1e-4, 1e2);
  return space;
}

Vec CustomScenario::true_parameters() const {
  Vec theta(3);
  theta << settings_.sigma, settings_.ell, settings_.noise_std;
  return theta;
}

StateSpaceProblem CustomScenario::problem(const Vec& theta) const {
  const LtiSde sde = matern_to_sde(make_matern(settings_.nu, theta(0), theta(1)));
  AugmentedModel model = AugmentedModel::linear(sde.F, sde.L, sde.q);
  model.n_forces = 1;
  model.emit = sde.emit;
  model.emit_offset = Vec::Zero(1);
  MeasurementModel meas = MeasurementModel::linear(model.emit, Mat::Constant(1, 1, theta(2) * theta(2)));
  GaussianState x0{0.0, Vec::Zero(sde.dim()), sde.prior_cov};
  return {std::move(model), std::move(meas), std::move(x0)};
}

SyntheticRun CustomScenario::simulate() const {
  const StateSpaceProblem p = problem(true_parameters());
  Rng sim = make_rng(seed_, 1);
  Rng noise = make_rng(seed_, 2);
  std::vector<double> times;
  for (int k = 0; k <= settings_.n_obs; ++k) times.push_back(settings_.dt * k);
  const Vec x0 = sample_gaussian(p.x0.m, p.x0.P, sim);
  SyntheticRun run;
  run.truth = lfm::simulate(p.model, x0, times, sim, settings_.sim_substeps);
  std::normal_distribution<double> normal;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double f = p.model.forces(run.truth.states.col(static_cast<Eigen::Index>(k)))(0);
    run.data.push_back({times[k], Vec::Constant(1, f + settings_.noise_std * normal(noise))});
  }
  return run;
}

MetricsReport run_custom_experiment(const ExperimentConfig& cfg) {
  const CustomSettings settings = CustomSettings::from(cfg.raw, cfg.substeps);
  MetricsReport report;
  report.experiment = "custom";
  report.replications.resize(static_cast<std::size_t>(cfg.reps));
  const int max_eval = static_cast<int>(cfg.raw.get_int("fit.max_evaluations", 400));
  parallel_for(cfg.reps, cfg.threads, [&](int rep) {
    ReplicationMetrics& m = report.replications[static_cast<std::size_t>(rep)];
    m.index = rep;
    m.label = "custom";
    m.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    m.seconds = timed([&] {
      const CustomScenario scenario(settings, m.seed);
      const SyntheticRun run = scenario.simulate();
      const auto space = scenario.parameters();
      const ProblemBuilder builder = [&](const Vec& th) { return scenario.problem(th); };
      estim::MaximizeOptions opt;
      opt.max_evaluations = max_eval;
      opt.seed = derive_seed(m.seed, 3);
      const auto fit = estim::maximize(
          [&](const Vec& th) { return log_marginal(builder, run.data, th, scenario.substeps()); }, space,
          scenario.true_parameters() * 1.5, opt);
      const auto names = space.names();
      for (std::size_t i = 0; i < names.size(); ++i) m.extra["fit_" + names[i]] = fit.theta(static_cast<Eigen::Index>(i));
      m.extra["loglik"] = fit.value;
      try {
        const FilterResult fr = run_filter(scenario, fit.theta, run.data);
        const AlignedSmoother s = align(smooth(fr), run.data.size());
        const StateSpaceProblem p = scenario.problem(fit.theta);
        double sum = 0.0;
        for (std::size_t k = 0; k < run.data.size(); ++k) {
          const auto col = static_cast<Eigen::Index>(k + 1);
          sum += std::pow(p.model.forces(s.means[k])(0) - p.model.forces(run.truth.states.col(col))(0), 2);
        }
        m.rmse = std::sqrt(sum / static_cast<double>(run.data.size()));
      } catch (const DivergenceError& e) {
        m.diverged = true;
        m.note = e.what();
      }
    });
  });
  write_report(cfg.out_dir, report);
  return report;
}

}  // namespace lfm::app
