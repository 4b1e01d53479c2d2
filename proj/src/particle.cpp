#include "lfm/cdgauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lfm {

std::vector<double> normalize_log_weights(const std::vector<double>& log_weights, double t) {
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(mx)) throw DivergenceError("particle weight underflow", t);
  std::vector<double> w(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - mx);
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return w;
}

std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, Rng& rng) {
  const std::size_t n = weights.size();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u0 = uniform(rng) / static_cast<double>(n);
  std::vector<std::size_t> idx(n);
  double cumulative = weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u0 + static_cast<double>(i) / static_cast<double>(n);
    while (u > cumulative && j + 1 < n) cumulative += weights[++j];
    idx[i] = j;
  }
  return idx;
}

ParticleFilterResult bootstrap_pf(const AugmentedModel& model, const MeasurementModel& meas,
                                  const std::vector<Observation>& data, const GaussianState& x0,
                                  std::size_t n_particles, std::uint64_t seed, int substeps) {
  if (n_particles < 100) throw ConfigError("particle filter needs at least 100 particles");
  meas.validate();
  Rng rng(seed);
  std::vector<Vec> particles(n_particles);
  for (auto& p : particles) p = sample_gaussian(x0.m, x0.P, rng);

  Eigen::LLT<Mat> r_llt(meas.R);
  const double log_norm = -0.5 * (meas.dim() * std::log(2.0 * std::numbers::pi)) -
                          r_llt.matrixLLT().diagonal().array().log().sum();

  ParticleFilterResult out;
  double t_prev = x0.t;
  std::vector<double> logw(n_particles);
  std::vector<double> w(n_particles, 1.0 / static_cast<double>(n_particles));
  for (const Observation& obs : data) {
    if (obs.t > t_prev) {
      for (auto& p : particles) p = propagate(model, p, t_prev, obs.t, substeps, rng);
    }
    if (obs.y) {
      for (std::size_t i = 0; i < n_particles; ++i) {
        const Vec e = *obs.y - meas.h(particles[i]);
        const Vec z = r_llt.matrixL().solve(e);
        logw[i] = log_norm - 0.5 * z.squaredNorm();
        if (!std::isfinite(logw[i])) logw[i] = -std::numeric_limits<double>::infinity();
      }
      const double mx = *std::max_element(logw.begin(), logw.end());
      w = normalize_log_weights(logw, obs.t);
      double mean_w = 0.0;
      for (double lw : logw) mean_w += std::exp(lw - mx);
      out.loglik += mx + std::log(mean_w / static_cast<double>(n_particles));
    } else {
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n_particles));
    }

    Vec mean = Vec::Zero(model.dim);
    for (std::size_t i = 0; i < n_particles; ++i) mean += w[i] * particles[i];
    Mat cov = Mat::Zero(model.dim, model.dim);
    for (std::size_t i = 0; i < n_particles; ++i) {
      const Vec d = particles[i] - mean;
      cov.noalias() += w[i] * d * d.transpose();
    }
    out.times.push_back(obs.t);
    out.means.push_back(std::move(mean));
    out.covs.push_back(std::move(cov));

    if (obs.y) {
      const auto idx = systematic_resample(w, rng);
      std::vector<Vec> resampled(n_particles);
      for (std::size_t i = 0; i < n_particles; ++i) resampled[i] = particles[idx[i]];
      particles = std::move(resampled);
    }
    t_prev = obs.t;
  }
  return out;
}

}  // namespace lfm
