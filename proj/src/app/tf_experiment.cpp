#include "lfm/app/tf_experiment.hpp"

#include "lfm/app/pipeline.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace lfm::app {
namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return out;
}

TfRow parse_row(const std::string& text, const std::string& origin) {
  const auto colon = text.find(':');
  TfRow row;
  try {
    row.link = models::parse_tf_link(text.substr(0, colon));
    if (colon != std::string::npos) row.gamma = std::stod(text.substr(colon + 1));
  } catch (const std::invalid_argument&) {
    throw ConfigError(origin + ": tf.rows: cannot parse '" + text + "' (expected link:gamma)");
  }
  return row;
}

}  // namespace

std::string TfRow::label() const {
  std::ostringstream ss;
  ss << models::to_string(link);
  if (link != models::TfLink::Exponential) ss << "_" << gamma;
  return ss.str();
}

TfSettings TfSettings::from(const Config& cfg, int default_substeps) {
  TfSettings s;
  for (const auto& r : cfg.get_strings("tf.rows", {"saturation:1"})) s.rows.push_back(parse_row(r, cfg.origin()));
  s.genes = cfg.get_int("tf.genes", s.genes);
  s.forces = cfg.get_int("tf.forces", s.forces);
  s.t_end = cfg.get_double("tf.t_end", s.t_end);
  s.n_obs = static_cast<int>(cfg.get_int("tf.n_obs", s.n_obs));
  s.grid_points = static_cast<int>(cfg.get_int("tf.grid_points", s.grid_points));
  s.noise_std = cfg.get_double("tf.noise_std", s.noise_std);
  s.nu = cfg.get_double("tf.nu", s.nu);
  s.sigma_m = cfg.get_double("tf.sigma_m", s.sigma_m);
  s.ell = cfg.get_double("tf.ell", s.ell);
  s.x0_var = cfg.get_double("tf.x0_var", s.x0_var);
  s.sim_substeps = static_cast<int>(cfg.get_int("tf.sim_substeps", s.sim_substeps));
  s.substeps = static_cast<int>(cfg.get_int("tf.substeps", default_substeps));
  s.divergence_factor = cfg.get_double("tf.divergence_factor", s.divergence_factor);
  s.write_replications = static_cast<int>(cfg.get_int("tf.write_replications", s.write_replications));

  const auto fail = [&](const std::string& what) { throw ConfigError(cfg.origin() + ": tf." + what); };
  if (s.rows.empty()) fail("rows: at least one link is required");
  if (s.genes < 1 || s.forces < 1) fail("genes/forces must be >= 1");
  if (!(s.t_end > 0.0)) fail("t_end must be > 0");
  if (s.n_obs < 1 || s.grid_points < 2) fail("n_obs must be >= 1 and grid_points >= 2");
  if (!(s.noise_std > 0.0)) fail("noise_std must be > 0");
  if (!(s.x0_var > 0.0)) fail("x0_var must be > 0");
  if (s.sim_substeps < 1 || s.substeps < 1) fail("substeps must be >= 1");
  if (s.write_replications < 0) fail("write_replications must be >= 0");
  make_matern(s.nu, s.sigma_m, s.ell).validate();
  for (const auto& r : s.rows) {
    if (r.link != models::TfLink::Exponential && !(r.gamma > 0.0)) fail("rows: gamma must be > 0");
  }
  return s;
}

TfGrid tf_grid(const TfSettings& s) {
  const auto eval = linspace(0.0, s.t_end, s.grid_points);
  const auto obs = linspace(0.0, s.t_end, s.n_obs);
  TfGrid g;
  std::size_t i = 0;
  std::size_t j = 0;
  const double tol = 1e-9 * s.t_end;
  while (i < eval.size() || j < obs.size()) {
    const bool take_eval = j >= obs.size() || (i < eval.size() && eval[i] <= obs[j] + tol);
    const bool take_obs = i >= eval.size() || (j < obs.size() && obs[j] <= eval[i] + tol);
    g.times.push_back(take_eval ? eval[i] : obs[j]);
    g.is_eval.push_back(take_eval);
    g.is_obs.push_back(take_obs);
    if (take_eval) ++i;
    if (take_obs) ++j;
  }
  return g;
}

TfScenario::TfScenario(TfSettings settings, TfRow row, std::uint64_t seed)
    : settings_(std::move(settings)), seed_(seed) {
  Rng rng = make_rng(seed_, 0);
  params_ = models::sample_tf_params(settings_.genes, settings_.forces, row.link, row.gamma, rng);
  grid_ = tf_grid(settings_);
}

estim::ParamSpace TfScenario::parameters() const {
  estim::ParamSpace space;
  space.add("sigma_m", 1e-3, 1e3);
  space.add("ell", 1e-2, 1e3);
  return space;
}

Vec TfScenario::true_parameters() const {
  Vec theta(2);
  theta << settings_.sigma_m, settings_.ell;
  return theta;
}

StateSpaceProblem TfScenario::problem(const Vec& theta) const {
  const LtiSde force = matern_to_sde(make_matern(settings_.nu, theta(0), theta(1)));
  std::vector<LtiSde> forces(static_cast<std::size_t>(settings_.forces), force);
  AugmentedModel model = augment(models::tf_mechanistic(params_), forces);
  Mat H = Mat::Zero(settings_.genes, model.dim);
  H.leftCols(settings_.genes).setIdentity();
  MeasurementModel meas =
      MeasurementModel::linear(H, settings_.noise_std * settings_.noise_std * Mat::Identity(settings_.genes, settings_.genes));
  GaussianState x0 = initial_state(model, params_.initial,
                                   settings_.x0_var * Mat::Identity(settings_.genes, settings_.genes));
  return {std::move(model), std::move(meas), std::move(x0)};
}

SyntheticRun TfScenario::simulate() const {
  const StateSpaceProblem p = problem(true_parameters());
  Rng sim = make_rng(seed_, 1);
  Rng noise = make_rng(seed_, 2);
  Vec x0 = p.x0.m;
  for (const auto& b : p.model.blocks) {
    x0.segment(b.offset, b.size) = sample_gaussian(Vec::Zero(b.size), b.sde.prior_cov, sim);
  }
  SyntheticRun run;
  run.truth = lfm::simulate(p.model, x0, grid_.times, sim, settings_.sim_substeps);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < grid_.times.size(); ++k) {
    Observation o{grid_.times[k], std::nullopt};
    if (grid_.is_obs[k]) {
      Vec y = run.truth.states.col(static_cast<Eigen::Index>(k)).head(settings_.genes);
      for (Eigen::Index j = 0; j < y.size(); ++j) y(j) += settings_.noise_std * normal(noise);
      o.y = y;
    }
    if (k == 0 && !o.y) continue;
    run.data.push_back(std::move(o));
  }
  return run;
}

double tf_force_rmse(const TfScenario& scenario, const SyntheticRun& run, const SmootherResult& sr) {
  const StateSpaceProblem p = scenario.problem(scenario.true_parameters());
  const AlignedSmoother aligned = align(sr, run.data.size());
  const auto& grid = scenario.grid();
  // data[k] corresponds to grid point k + skip (the initial point is dropped when unobserved).
  const std::size_t skip = grid.times.size() - run.data.size();
  double sum = 0.0;
  int count = 0;
  for (std::size_t g = 0; g < grid.times.size(); ++g) {
    if (!grid.is_eval[g]) continue;
    const Vec truth = p.model.forces(run.truth.states.col(static_cast<Eigen::Index>(g)));
    const Vec est = g < skip ? p.model.forces(p.x0.m) : p.model.forces(aligned.means[g - skip]);
    sum += (truth - est).squaredNorm();
    count += static_cast<int>(truth.size());
  }
  return std::sqrt(sum / count);
}

std::uint64_t tf_replication_seed(std::uint64_t master, std::size_t row, int rep) {
  return derive_seed(derive_seed(master, row), static_cast<std::uint64_t>(rep));
}

MetricsReport run_tf_experiment(const ExperimentConfig& cfg) {
  const TfSettings settings = TfSettings::from(cfg.raw, cfg.substeps);
  MetricsReport report;
  report.experiment = "tf";
  report.replications.resize(settings.rows.size() * static_cast<std::size_t>(cfg.reps));

  const int total = static_cast<int>(report.replications.size());
  parallel_for(total, cfg.threads, [&](int task) {
    const std::size_t row_index = static_cast<std::size_t>(task / cfg.reps);
    const int rep = task % cfg.reps;
    const TfRow& row = settings.rows[row_index];
    ReplicationMetrics& m = report.replications[static_cast<std::size_t>(task)];
    m.index = rep;
    m.label = row.label();
    m.seed = tf_replication_seed(cfg.seed, row_index, rep);
    m.seconds = timed([&] {
      const TfScenario scenario(settings, row, m.seed);
      const SyntheticRun run = scenario.simulate();
      const bool write = rep < settings.write_replications;
      std::ostringstream name;
      name << "rep" << std::setw(3) << std::setfill('0') << rep;
      const auto dir = cfg.out_dir / row.label() / name.str();
      if (write) write_simulation(dir, run, scenario.measurement_dim());
      try {
        const FilterResult fr = run_filter(scenario, scenario.true_parameters(), run.data);
        const SmootherResult sr = smooth(fr);
        if (write) {
          write_filter(dir, fr, scenario.measurement_dim());
          write_smoother(dir, sr, fr.loglik);
        }
        m.rmse = tf_force_rmse(scenario, run, sr);
        m.extra["loglik"] = fr.loglik;
        m.diverged = !std::isfinite(m.rmse) || m.rmse > settings.divergence_factor * settings.sigma_m;
        if (m.diverged) m.note = "rmse above threshold";
      } catch (const DivergenceError& e) {
        m.diverged = true;
        m.note = e.what();
        if (write) write_diverged(dir, "filter", run.data.size());
      }
    });
  });

  std::string csv = "link,gamma,mean_rmse,n_div\n";
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < settings.rows.size(); ++r) {
    double sum = 0.0;
    int ok = 0;
    int div = 0;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const auto& m = report.replications[r * static_cast<std::size_t>(cfg.reps) + static_cast<std::size_t>(rep)];
      if (m.diverged) {
        ++div;
      } else {
        sum += m.rmse;
        ++ok;
      }
    }
    const double mean = ok > 0 ? sum / ok : std::numeric_limits<double>::quiet_NaN();
    const auto& row = settings.rows[r];
    csv += models::to_string(row.link) + "," + io::format_double(row.gamma) + "," +
           (ok > 0 ? io::format_double(mean) : std::string()) + "," + std::to_string(div) + "\n";
    rows.push_back({{"link", models::to_string(row.link)},
                    {"gamma", row.gamma},
                    {"mean_rmse", ok > 0 ? nlohmann::json(mean) : nlohmann::json(nullptr)},
                    {"n_div", div},
                    {"replications", cfg.reps}});
  }
  io::write_text(cfg.out_dir / "summary.csv", csv);
  report.summary["rows"] = rows;
  report.summary["seed"] = cfg.seed;
  write_report(cfg.out_dir, report);
  return report;
}

}  // namespace lfm::app
