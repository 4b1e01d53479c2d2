#include "lfm/app/ballistic_experiment.hpp"

#include "lfm/app/pipeline.hpp"
#include "lfm/gp_sde.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace lfm::app {
namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

BallisticSettings BallisticSettings::from(const Config& cfg, int default_substeps) {
  BallisticSettings s;
  auto& p = s.params;
  p.alpha = cfg.get_double("ballistic.alpha", p.alpha);
  p.gamma_air = cfg.get_double("ballistic.gamma_air", p.gamma_air);
  p.g = cfg.get_double("ballistic.g", p.g);
  p.q_r = cfg.get_double("ballistic.q_r", p.q_r);
  p.q_v = cfg.get_double("ballistic.q_v", p.q_v);
  p.sensor_x = cfg.get_double("ballistic.sensor_x", p.sensor_x);
  p.sensor_y = cfg.get_double("ballistic.sensor_y", p.sensor_y);
  p.sigma_n = cfg.get_double("ballistic.sigma_n", p.sigma_n);
  p.validate();
  s.r0 = cfg.get_double("ballistic.r0", s.r0);
  s.v0 = cfg.get_double("ballistic.v0", s.v0);
  s.prior_std_r = cfg.get_double("ballistic.prior_std_r", s.prior_std_r);
  s.prior_std_v = cfg.get_double("ballistic.prior_std_v", s.prior_std_v);
  s.t_end = cfg.get_double("ballistic.t_end", s.t_end);
  s.n_meas = static_cast<int>(cfg.get_int("ballistic.n_meas", s.n_meas));
  s.refine = static_cast<int>(cfg.get_int("ballistic.refine", s.refine));
  s.nu = cfg.get_double("ballistic.nu", s.nu);
  s.sigma_m = cfg.get_double("ballistic.sigma_m", s.sigma_m);
  s.ell = cfg.get_double("ballistic.ell", s.ell);
  s.sim_substeps = static_cast<int>(cfg.get_int("ballistic.sim_substeps", s.sim_substeps));
  s.substeps = static_cast<int>(cfg.get_int("ballistic.substeps", std::max(1, default_substeps / s.refine)));
  s.likelihood_substeps = static_cast<int>(cfg.get_int("ballistic.likelihood_substeps", s.likelihood_substeps));
  const std::string meas = cfg.get_string("ballistic.measurement", "range");
  if (meas != "range" && meas != "altitude") {
    throw ConfigError(cfg.origin() + ": ballistic.measurement must be 'range' or 'altitude'");
  }
  s.range_measurement = meas == "range";

  s.fit = cfg.get_bool("fit.enabled", s.fit);
  s.fit_start = to_vec(cfg.get_doubles("fit.start", {1e-3, 30.0, 3.0}));
  s.fit_evaluations = static_cast<int>(cfg.get_int("fit.max_evaluations", s.fit_evaluations));
  s.coverage_at_fit = cfg.get_string("ballistic.coverage_at", "true") == "fit";
  s.mcmc_samples = static_cast<int>(cfg.get_int("mcmc.samples", s.mcmc_samples));
  s.mcmc_step = to_vec(cfg.get_doubles("mcmc.step", {0.05, 0.15, 0.15}));
  s.burn_in = cfg.get_double("mcmc.burn_in", s.burn_in);
  s.write_replications = static_cast<int>(cfg.get_int("ballistic.write_replications", s.write_replications));

  const auto fail = [&](const std::string& what) { throw ConfigError(cfg.origin() + ": " + what); };
  if (!(s.prior_std_r > 0.0) || !(s.prior_std_v > 0.0)) fail("ballistic.prior_std_* must be > 0");
  if (!(s.t_end > 0.0) || s.n_meas < 1 || s.refine < 1) fail("ballistic.t_end/n_meas/refine must be positive");
  if (s.sim_substeps < 1 || s.substeps < 1 || s.likelihood_substeps < 1) fail("ballistic substeps must be >= 1");
  if (s.fit_start.size() != 3) fail("fit.start needs three values (alpha, sigma_m, ell)");
  if (s.mcmc_step.size() != 3) fail("mcmc.step needs three values");
  if (s.mcmc_samples < 0) fail("mcmc.samples must be >= 0");
  if (!(s.burn_in >= 0.0 && s.burn_in < 1.0)) fail("mcmc.burn_in must lie in [0, 1)");
  make_matern(s.nu, s.sigma_m, s.ell).validate();
  return s;
}

BallisticScenario::BallisticScenario(BallisticSettings settings, std::uint64_t seed)
    : settings_(std::move(settings)), seed_(seed) {}

estim::ParamSpace BallisticScenario::parameters() const {
  estim::ParamSpace space;
  space.add("alpha", 1e-6, 1e-1);
  space.add("sigma_m", 1e-1, 1e3);
  space.add("ell", 1e-1, 1e2);
  return space;
}

Vec BallisticScenario::true_parameters() const {
  Vec theta(3);
  theta << settings_.params.alpha, settings_.sigma_m, settings_.ell;
  return theta;
}

StateSpaceProblem BallisticScenario::problem(const Vec& theta) const {
  models::BallisticParams p = settings_.params;
  p.alpha = theta(0);
  const LtiSde force = matern_to_sde(make_matern(settings_.nu, theta(1), theta(2)));
  AugmentedModel model = augment(models::ballistic_mechanistic(p), {force});
  MeasurementModel meas;
  if (settings_.range_measurement) {
    meas = models::ballistic_measurement(p);
  } else {
    Mat H = Mat::Zero(1, model.dim);
    H(0, 0) = 1.0;
    meas = MeasurementModel::linear(H, Mat::Constant(1, 1, p.sigma_n * p.sigma_n));
  }
  Vec m0(2);
  m0 << settings_.r0, settings_.v0;
  Vec var(2);
  var << settings_.prior_std_r * settings_.prior_std_r, settings_.prior_std_v * settings_.prior_std_v;
  GaussianState x0 = initial_state(model, m0, var.asDiagonal());
  return {std::move(model), std::move(meas), std::move(x0)};
}

SyntheticRun BallisticScenario::simulate() const {
  const StateSpaceProblem p = problem(true_parameters());
  Rng sim = make_rng(seed_, 1);
  Rng noise = make_rng(seed_, 2);
  const int n = settings_.n_meas * settings_.refine;
  std::vector<double> times;
  for (int k = 0; k <= n; ++k) times.push_back(settings_.t_end * k / n);
  const Vec x0 = sample_gaussian(p.x0.m, p.x0.P, sim);
  SyntheticRun run;
  run.truth = lfm::simulate(p.model, x0, times, sim, settings_.sim_substeps);
  std::normal_distribution<double> normal;
  for (int k = 1; k <= n; ++k) {
    Observation o{times[static_cast<std::size_t>(k)], std::nullopt};
    if (k % settings_.refine == 0) {
      const Vec x = run.truth.states.col(k);
      o.y = p.meas.h(x) + Vec::Constant(1, settings_.params.sigma_n * normal(noise));
    }
    run.data.push_back(std::move(o));
  }
  return run;
}

io::CsvTable ballistic_bands(const BallisticScenario& scenario, const SyntheticRun& run,
                             const SmootherResult& sr, const Vec& theta) {
  const StateSpaceProblem p = scenario.problem(theta);
  const AlignedSmoother s = align(sr, run.data.size());
  io::CsvTable table;
  table.header = {"t", "r_true", "r_mean", "r_std", "v_true", "v_mean", "v_std", "u_true", "u_mean", "u_std"};
  const RowVec e = p.model.emit.row(0);
  for (std::size_t k = 0; k < run.data.size(); ++k) {
    const Vec truth = run.truth.states.col(static_cast<Eigen::Index>(k + 1));
    const Vec& m = s.means[k];
    const Mat& P = s.covs[k];
    table.rows.push_back({run.data[k].t, truth(0), m(0), std::sqrt(P(0, 0)), truth(1), m(1), std::sqrt(P(1, 1)),
                          p.model.forces(truth)(0), p.model.forces(m)(0), std::sqrt(e * P * e.transpose())});
  }
  return table;
}

MetricsReport run_ballistic_experiment(const ExperimentConfig& cfg) {
  const BallisticSettings settings = BallisticSettings::from(cfg.raw, cfg.substeps);
  MetricsReport report;
  report.experiment = "ballistic";
  report.replications.resize(static_cast<std::size_t>(cfg.reps));

  parallel_for(cfg.reps, cfg.threads, [&](int rep) {
    ReplicationMetrics& m = report.replications[static_cast<std::size_t>(rep)];
    m.index = rep;
    m.label = "ballistic";
    m.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    m.seconds = timed([&] {
      const BallisticScenario scenario(settings, m.seed);
      const SyntheticRun run = scenario.simulate();
      const bool write = rep < settings.write_replications;
      std::ostringstream name;
      name << "rep" << std::setw(3) << std::setfill('0') << rep;
      const auto dir = cfg.out_dir / name.str();
      if (write) write_simulation(dir, run, 1);

      const auto space = scenario.parameters();
      const auto names = space.names();
      const ProblemBuilder builder = [&](const Vec& th) { return scenario.problem(th); };
      std::vector<Observation> measured;
      for (const auto& o : run.data) {
        if (o.y) measured.push_back(o);
      }
      const auto loglik = [&](const Vec& th) {
        return log_marginal(builder, measured, th, settings.likelihood_substeps);
      };

      Vec theta = scenario.true_parameters();
      if (settings.fit) {
        estim::MaximizeOptions opt;
        opt.max_evaluations = settings.fit_evaluations;
        opt.seed = derive_seed(m.seed, 3);
        const auto fit = estim::maximize(loglik, space, settings.fit_start, opt);
        for (std::size_t i = 0; i < names.size(); ++i) m.extra["fit_" + names[i]] = fit.theta(static_cast<Eigen::Index>(i));
        m.extra["fit_loglik"] = fit.value;
        m.extra["fit_on_boundary"] = fit.on_boundary ? 1.0 : 0.0;
        if (write) {
          nlohmann::json j;
          for (std::size_t i = 0; i < names.size(); ++i) j["parameters"][names[i]] = fit.theta(static_cast<Eigen::Index>(i));
          j["loglik"] = fit.value;
          j["converged"] = fit.converged;
          j["on_boundary"] = fit.on_boundary;
          j["evaluations"] = fit.evaluations;
          io::write_json_file(dir / "fit.json", j);
        }
        if (std::isfinite(fit.value)) theta = fit.theta;

        if (settings.mcmc_samples > 0 && std::isfinite(fit.value)) {
          const auto chain = estim::rw_metropolis(loglik, space, fit.theta, settings.mcmc_samples, settings.mcmc_step,
                                                  derive_seed(m.seed, 4));
          const auto burn = static_cast<Eigen::Index>(settings.burn_in * static_cast<double>(chain.unconstrained.rows()));
          const auto tail = chain.unconstrained.col(0).tail(chain.unconstrained.rows() - burn);
          m.extra["log_alpha_mean"] = tail.mean();
          m.extra["log_alpha_std"] =
              std::sqrt((tail.array() - tail.mean()).square().sum() / std::max<Eigen::Index>(1, tail.size() - 1));
          m.extra["mcmc_acceptance"] = chain.acceptance_rate;
          if (write) {
            io::write_csv_file(dir / "chain.csv", io::chain_table(chain, names));
            io::write_json_file(dir / "chain.json", io::chain_summary(chain, names, settings.burn_in));
          }
        }
      }

      const Vec theta_bands = settings.coverage_at_fit ? theta : scenario.true_parameters();
      try {
        const FilterResult fr = run_filter(scenario, theta_bands, run.data);
        const SmootherResult sr = smooth(fr);
        if (write) {
          write_filter(dir, fr, 1);
          write_smoother(dir, sr, fr.loglik);
        }
        const io::CsvTable bands = ballistic_bands(scenario, run, sr, theta_bands);
        if (write) io::write_csv_file(dir / "bands.csv", bands);
        double se_u = 0.0;
        double se_r = 0.0;
        int covered = 0;
        for (const auto& row : bands.rows) {
          se_r += std::pow(row[2] - row[1], 2);
          se_u += std::pow(row[8] - row[7], 2);
          if (std::abs(row[8] - row[7]) <= 1.959963984540054 * row[9]) ++covered;
        }
        const auto n = static_cast<double>(bands.rows.size());
        m.rmse = std::sqrt(se_u / n);
        m.state_rmse = std::sqrt(se_r / n);
        m.coverage = covered / n;
        m.extra["loglik"] = fr.loglik;
      } catch (const DivergenceError& e) {
        m.diverged = true;
        m.note = e.what();
        if (write) write_diverged(dir, "filter", run.data.size());
      }
    });
  });

  double cov_sum = 0.0;
  int ok = 0;
  for (const auto& m : report.replications) {
    if (!m.diverged) {
      cov_sum += m.coverage;
      ++ok;
    }
  }
  report.summary["seed"] = cfg.seed;
  report.summary["mean_coverage"] = ok > 0 ? nlohmann::json(cov_sum / ok) : nlohmann::json(nullptr);
  report.summary["n_diverged"] = cfg.reps - ok;
  write_report(cfg.out_dir, report);
  return report;
}

}  // namespace lfm::app
