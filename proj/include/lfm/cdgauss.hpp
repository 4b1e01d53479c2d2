#pragma once

#include "lfm/ssm.hpp"
#include "lfm/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace lfm {

/// One time point of a filtering grid. Points without `y` are prediction-only.
struct Observation {
  double t = 0.0;
  std::optional<Vec> y;
};

struct PredictStep {
  GaussianState prior;
  GaussianState predicted;
  Mat C;  ///< cross covariance between the prior and the predicted state
};

/// Integrates the Gaussian moment ODEs (and the cross covariance, if requested)
/// from state.t to t1 with classical RK4 in `substeps` equal steps.
PredictStep predict(const AugmentedModel& model, const GaussianState& state, double t1,
                    int substeps, bool track_cross = true);

struct UpdateResult {
  GaussianState posterior;
  double loglik = 0.0;
  Vec mu;
  Mat S;
};

/// Moment-matching update with S = Cov[h(x)] + R.
UpdateResult update(const GaussianState& state, const MeasurementModel& meas, const Vec& y);

struct FilterOptions {
  int substeps = 10;
  bool track_cross = true;  ///< needed by smooth(); likelihood-only runs can skip it
};

struct FilterStep {
  double t = 0.0;
  Vec m_pred;
  Mat P_pred;
  Mat C;
  Vec m;
  Mat P;
  bool has_measurement = false;
  Vec y;
  Vec mu;
  Mat S;
  double loglik = 0.0;
};

struct FilterResult {
  GaussianState initial;
  std::vector<FilterStep> steps;
  double loglik = 0.0;
  bool has_cross = false;
};

/// Runs predict/update over `data`. The first point may coincide with x0.t, in which case
/// only the update is applied there.
FilterResult filter(const AugmentedModel& model, const MeasurementModel& meas,
                    const std::vector<Observation>& data, const GaussianState& x0,
                    const FilterOptions& options = {});

struct SmootherResult {
  std::vector<double> times;  ///< initial time followed by every filter step
  std::vector<Vec> means;
  std::vector<Mat> covs;
  std::vector<Mat> gains;     ///< gains[k] links entry k to entry k+1
  double max_trace_excess = 0.0;  ///< max_k tr(P^s_k) - tr(P_k)
};

SmootherResult smooth(const FilterResult& result);

/// Model bundle produced from a parameter vector.
struct StateSpaceProblem {
  AugmentedModel model;
  MeasurementModel meas;
  GaussianState x0;
};

using ProblemBuilder = std::function<StateSpaceProblem(const Vec& theta)>;

/// log p(y_{1:T} | theta), or -infinity when the filter diverges.
double log_marginal(const ProblemBuilder& builder, const std::vector<Observation>& data,
                    const Vec& theta, int substeps = 10);

/// log N(y | mu, S) from a Cholesky factorization; throws DivergenceError if S is not PD.
double gaussian_logpdf(const Vec& y, const Vec& mu, const Mat& S);

// Bootstrap particle filter (validation oracle).

struct ParticleFilterResult {
  std::vector<double> times;
  std::vector<Vec> means;
  std::vector<Mat> covs;
  double loglik = 0.0;
};

/// Normalized weights exp(lw - logsumexp(lw)); throws DivergenceError on total underflow.
std::vector<double> normalize_log_weights(const std::vector<double>& log_weights, double t);

std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, Rng& rng);

ParticleFilterResult bootstrap_pf(const AugmentedModel& model, const MeasurementModel& meas,
                                  const std::vector<Observation>& data, const GaussianState& x0,
                                  std::size_t n_particles, std::uint64_t seed, int substeps = 10);

}  // namespace lfm
