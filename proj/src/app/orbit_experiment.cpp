#include "lfm/app/orbit_experiment.hpp"

#include "lfm/app/pipeline.hpp"
#include "lfm/gp_sde.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace lfm::app {
namespace {

using models::Vector3;
using models::Vector6;

std::array<int, 3> three_ints(const Config& cfg, const std::string& key, std::array<int, 3> fallback) {
  const auto v = cfg.get_doubles(key, {double(fallback[0]), double(fallback[1]), double(fallback[2])});
  if (v.size() != 3) throw ConfigError(cfg.origin() + ": " + key + " needs three values (R, T, N)");
  std::array<int, 3> out{};
  for (int i = 0; i < 3; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(v[static_cast<std::size_t>(i)]);
    if (out[static_cast<std::size_t>(i)] < 0 || out[static_cast<std::size_t>(i)] != v[static_cast<std::size_t>(i)]) {
      throw ConfigError(cfg.origin() + ": " + key + " must hold non-negative integers");
    }
  }
  return out;
}

int steps_for(double span, double step) { return std::max(1, static_cast<int>(std::ceil(span / step - 1e-9))); }

}  // namespace

OrbitSettings OrbitSettings::from(const Config& cfg, int default_substeps) {
  OrbitSettings s;
  if (cfg.has("orbit.gravity_file")) s.gravity_file = cfg.resolve(cfg.get_string("orbit.gravity_file", "")).string();
  s.n_max = static_cast<int>(cfg.get_int("orbit.n_max", s.n_max));
  s.third_body = cfg.get_bool("orbit.third_body", s.third_body);
  s.srp = cfg.get_bool("orbit.srp", s.srp);
  s.srp_alpha = cfg.get_double("orbit.srp_alpha", s.srp_alpha);
  s.elements.a = cfg.get_double("orbit.semi_major_axis", s.elements.a);
  s.elements.e = cfg.get_double("orbit.eccentricity", s.elements.e);
  s.elements.i = cfg.get_double("orbit.inclination_deg", s.elements.i * 180.0 / std::numbers::pi) * std::numbers::pi / 180.0;
  s.elements.argp = cfg.get_double("orbit.argp_deg", 0.0) * std::numbers::pi / 180.0;
  s.obs_days = cfg.get_double("orbit.obs_days", s.obs_days);
  s.pred_days = cfg.get_double("orbit.pred_days", s.pred_days);
  s.obs_interval = cfg.get_double("orbit.obs_interval", s.obs_interval);
  s.sigma_pos = cfg.get_double("orbit.sigma_pos", s.sigma_pos);
  s.sigma_vel = cfg.get_double("orbit.sigma_vel", s.sigma_vel);
  s.f0 = cfg.get_double("orbit.f0", s.f0);
  s.harmonics = three_ints(cfg, "orbit.harmonics", s.harmonics);
  s.force_unit = cfg.get_double("orbit.force_unit", s.force_unit);
  s.prior_std = cfg.get_double("orbit.prior_std", s.prior_std);
  s.bias_std = cfg.get_double("orbit.bias_std", s.bias_std);
  s.amplitude_rate = cfg.get_double("orbit.amplitude_rate", s.amplitude_rate);
  s.q_eps = cfg.get_double("orbit.q_eps", s.q_eps);
  s.inject_std = cfg.get_double("orbit.inject_std", s.inject_std);
  s.inject_bias_std = cfg.get_double("orbit.inject_bias_std", s.inject_bias_std);
  s.inject_harmonics = three_ints(cfg, "orbit.inject_harmonics", s.harmonics);
  s.substeps = static_cast<int>(cfg.get_int("orbit.substeps", default_substeps));
  s.predict_step = cfg.get_double("orbit.predict_step", s.predict_step);
  s.report_interval = cfg.get_double("orbit.report_interval", s.report_interval);
  s.truth_step = cfg.get_double("orbit.truth_step", s.truth_step);
  s.success_ratio = cfg.get_double("orbit.success_ratio", s.success_ratio);

  const auto fail = [&](const std::string& what) { throw ConfigError(cfg.origin() + ": orbit." + what); };
  if (!s.gravity_file.empty() && !std::filesystem::exists(s.gravity_file)) {
    fail("gravity_file: '" + s.gravity_file + "' does not exist");
  }
  if (!(s.elements.a > models::kEarthRadius)) fail("semi_major_axis must exceed the Earth radius");
  if (!(s.elements.e >= 0.0 && s.elements.e < 0.9)) fail("eccentricity must lie in [0, 0.9)");
  if (!(s.obs_days > 0.0) || !(s.pred_days > 0.0) || !(s.obs_interval > 0.0)) fail("windows must be positive");
  if (!(s.sigma_pos > 0.0) || !(s.sigma_vel > 0.0)) fail("sigma_pos/sigma_vel must be > 0");
  if (!(s.f0 > 0.0) || !(s.force_unit > 0.0)) fail("f0/force_unit must be > 0");
  if (!(s.prior_std > 0.0) || !(s.bias_std > 0.0)) fail("prior_std/bias_std must be > 0");
  if (!(s.amplitude_rate >= 0.0) || !(s.q_eps >= 0.0)) fail("noise densities must be >= 0");
  if (!(s.inject_std >= 0.0) || !(s.inject_bias_std >= 0.0)) fail("inject_* must be >= 0");
  for (int a = 0; a < 3; ++a) {
    if (s.harmonics[static_cast<std::size_t>(a)] < 1) fail("harmonics must be >= 1");
  }
  if (s.substeps < 1) fail("substeps must be >= 1");
  if (!(s.predict_step > 0.0) || !(s.report_interval > 0.0) || !(s.truth_step > 0.0)) fail("steps must be > 0");
  return s;
}

models::OrbitEnvironment OrbitSettings::environment() const {
  models::OrbitEnvironment env;
  if (!gravity_file.empty()) env.gravity = models::load_gravity_model(gravity_file, n_max);
  env.third_body = third_body;
  env.srp = srp;
  env.srp_alpha = srp_alpha;
  return env;
}

Vector3 InjectedForce::operator()(double t) const {
  Vector3 u;
  for (std::size_t a = 0; a < 3; ++a) {
    double v = bias[a];
    for (std::size_t n = 0; n < cos_coef[a].size(); ++n) {
      const double w = 2.0 * std::numbers::pi * static_cast<double>(n + 1) * f0 * t;
      v += cos_coef[a][n] * std::cos(w) + sin_coef[a][n] * std::sin(w);
    }
    u(static_cast<Eigen::Index>(a)) = v;
  }
  return u;
}

OrbitScenario::OrbitScenario(OrbitSettings settings, std::uint64_t seed)
    : settings_(std::move(settings)), seed_(seed), env_(settings_.environment()) {
  Rng geometry = make_rng(seed_, 0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  models::KeplerElements el = settings_.elements;
  el.raan = angle(geometry);
  el.mean_anomaly = angle(geometry);
  env_.earth_angle0 = angle(geometry);
  env_.ephemeris.sun_longitude0 = angle(geometry);
  env_.ephemeris.moon_argument0 = angle(geometry);
  x0_ = models::kepler_to_cartesian(el);
  std::normal_distribution<double> normal;
  prior_mean_ = Vec(x0_);
  for (int i = 0; i < 6; ++i) prior_mean_(i) += (i < 3 ? settings_.sigma_pos : settings_.sigma_vel) * normal(geometry);

  Rng forcing = make_rng(seed_, 1);
  force_.f0 = settings_.f0;
  for (std::size_t a = 0; a < 3; ++a) {
    force_.bias[a] = settings_.inject_bias_std * normal(forcing);
    for (int n = 0; n < settings_.inject_harmonics[a]; ++n) {
      force_.cos_coef[a].push_back(settings_.inject_std * normal(forcing));
      force_.sin_coef[a].push_back(settings_.inject_std * normal(forcing));
    }
  }
}

StateSpaceProblem OrbitScenario::problem(const Vec&) const {
  std::vector<LtiSde> blocks;
  for (std::size_t a = 0; a < 3; ++a) {
    ResonatorSpec spec;
    spec.f0 = settings_.f0;
    spec.n_harmonics = settings_.harmonics[a];
    for (int n = 1; n <= spec.n_harmonics; ++n) {
      const double omega = 2.0 * std::numbers::pi * n * settings_.f0;
      spec.q_per_harmonic.push_back(2.0 * omega * omega * settings_.amplitude_rate);
    }
    spec.estimate_bias = true;
    spec.bias_var = settings_.bias_std * settings_.bias_std;
    spec.q_eps = settings_.q_eps;
    spec.prior_var = settings_.prior_std * settings_.prior_std;
    blocks.push_back(resonator_to_sde(spec));
  }
  AugmentedModel model = augment(models::orbit_mechanistic(env_, settings_.force_unit), blocks);
  MeasurementModel meas = models::orbit_measurement(model.dim, settings_.sigma_pos, settings_.sigma_vel);
  Vec var(6);
  var << Vec::Constant(3, settings_.sigma_pos * settings_.sigma_pos),
      Vec::Constant(3, settings_.sigma_vel * settings_.sigma_vel);
  GaussianState x0 = lfm::initial_state(model, prior_mean_, var.asDiagonal());
  return {std::move(model), std::move(meas), std::move(x0)};
}

SyntheticRun OrbitScenario::simulate() const {
  const int n_obs = static_cast<int>(std::llround(settings_.obs_days * 86400.0 / settings_.obs_interval));
  const double fu = settings_.force_unit;
  const auto u_rtn = [this, fu](double t, const Vector6&) -> Vector3 { return fu * force_(t); };
  SyntheticRun run;
  run.truth.states.resize(6, n_obs + 1);
  Vector6 x = x0_;
  run.truth.times.push_back(0.0);
  run.truth.states.col(0) = x;
  Rng noise = make_rng(seed_, 2);
  std::normal_distribution<double> normal;
  for (int k = 1; k <= n_obs; ++k) {
    const double t0 = (k - 1) * settings_.obs_interval;
    const double t1 = k * settings_.obs_interval;
    x = models::propagate_orbit(env_, x, t0, t1, steps_for(t1 - t0, settings_.truth_step), u_rtn);
    run.truth.times.push_back(t1);
    run.truth.states.col(k) = x;
    Vec y(6);
    for (int i = 0; i < 6; ++i) y(i) = x(i) + (i < 3 ? settings_.sigma_pos : settings_.sigma_vel) * normal(noise);
    run.data.push_back({t1, y});
  }
  return run;
}

OrbitPrediction run_orbit_prediction(const OrbitScenario& scenario) {
  const OrbitSettings& s = scenario.settings();
  const SyntheticRun run = scenario.simulate();
  const StateSpaceProblem p = scenario.problem(Vec(0));
  const FilterResult fr = filter(p.model, p.meas, run.data, p.x0, {s.substeps, false});

  OrbitPrediction out;
  out.loglik = fr.loglik;
  const double t_obs = run.data.back().t;
  const double t_end = t_obs + s.pred_days * 86400.0;
  const double fu = s.force_unit;
  const auto u_rtn = [&](double t, const Vector6&) -> Vector3 { return fu * scenario.force()(t); };

  Vector6 truth = run.truth.states.col(run.truth.states.cols() - 1);
  Vector6 det = run.data.back().y->head<6>();
  GaussianState lfm{t_obs, fr.steps.back().m, fr.steps.back().P};
  double t = t_obs;
  while (t < t_end - 1e-6) {
    const double t1 = std::min(t_end, t + s.report_interval);
    truth = models::propagate_orbit(scenario.environment(), truth, t, t1, steps_for(t1 - t, s.truth_step), u_rtn);
    det = models::propagate_orbit(scenario.environment(), det, t, t1, steps_for(t1 - t, s.predict_step));
    lfm = predict(p.model, lfm, t1, steps_for(t1 - t, s.predict_step), false).predicted;
    out.times.push_back(t1);
    out.err_lfm.push_back((lfm.m.head<3>() - truth.head<3>()).norm());
    out.err_det.push_back((det.head<3>() - truth.head<3>()).norm());
    t = t1;
  }
  return out;
}

MetricsReport run_orbit_experiment(const ExperimentConfig& cfg) {
  const OrbitSettings settings = OrbitSettings::from(cfg.raw, static_cast<int>(cfg.raw.get_int("orbit.substeps", 80)));
  MetricsReport report;
  report.experiment = "orbit";
  report.replications.resize(static_cast<std::size_t>(cfg.reps));
  parallel_for(cfg.reps, cfg.threads, [&](int rep) {
    ReplicationMetrics& m = report.replications[static_cast<std::size_t>(rep)];
    m.index = rep;
    m.label = "orbit";
    m.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    m.seconds = timed([&] {
      try {
        const OrbitScenario scenario(settings, m.seed);
        const OrbitPrediction pred = run_orbit_prediction(scenario);
        io::CsvTable table;
        table.header = {"t", "err_lfm", "err_det"};
        for (std::size_t k = 0; k < pred.times.size(); ++k) {
          table.rows.push_back({pred.times[k], pred.err_lfm[k], pred.err_det[k]});
        }
        std::ostringstream name;
        name << "rep" << std::setw(3) << std::setfill('0') << rep;
        io::write_csv_file(cfg.out_dir / name.str() / "errors.csv", table);
        m.rmse = pred.err_lfm.back();
        m.extra["err_lfm_end"] = pred.err_lfm.back();
        m.extra["err_det_end"] = pred.err_det.back();
        m.extra["ratio"] = pred.ratio();
        m.extra["loglik"] = pred.loglik;
      } catch (const DivergenceError& e) {
        m.diverged = true;
        m.note = e.what();
      }
    });
  });
  int pass = 0;
  for (const auto& m : report.replications) {
    if (!m.diverged && m.extra.at("ratio") <= settings.success_ratio) ++pass;
  }
  report.summary["seed"] = cfg.seed;
  report.summary["success_ratio"] = settings.success_ratio;
  report.summary["n_success"] = pass;
  write_report(cfg.out_dir, report);
  return report;
}

}  // namespace lfm::app
