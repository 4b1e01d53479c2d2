#include "lfm/cdgauss.hpp"

#include "lfm/linalg.hpp"
#include "lfm/quad.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace lfm {
namespace {

struct Moments {
  Vec m;
  Mat P;
  Mat C;
};

struct MomentRates {
  Vec dm;
  Mat dP;
  Mat dC;
};

class MomentOde {
 public:
  MomentOde(const AugmentedModel& model, bool track_cross)
      : model_(model), rule_(CubatureRule::spherical(model.dim)), track_cross_(track_cross) {}

  MomentRates operator()(double t, const Moments& s) const {
    SigmaPoints sp;
    try {
      sp = sigma_points(s.m, s.P, rule_);
    } catch (const SqrtError& e) {
      throw DivergenceError("prediction divergence", t, e.what());
    }
    const Eigen::Index count = sp.points.cols();
    Mat f(model_.dim, count);
    for (Eigen::Index i = 0; i < count; ++i) f.col(i) = model_.drift(sp.points.col(i), t);
    if (!f.allFinite()) throw DivergenceError("prediction divergence", t, "non-finite drift");

    MomentRates r;
    r.dm = weighted_column_sum(f, sp.weights);
    const Mat fc = f.colwise() - r.dm;
    // E[(x - m)(f - E f)^T] = sqrt(P) * sum_i w_i xi_i (f_i - E f)^T
    const Mat xi_f = rule_.unit_points() * sp.weights.asDiagonal() * fc.transpose();
    const Mat exf = sp.sqrt_cov * xi_f;
    r.dP = exf + exf.transpose();
    if (model_.q.size() > 0) {
      if (model_.state_dependent_dispersion) {
        // Constant channels at the mean; varying channels averaged over the sigma points.
        Mat L = model_.dispersion(s.m, t);
        for (Eigen::Index c : model_.varying_channels) L.col(c).setZero();
        r.dP += L * model_.q.asDiagonal() * L.transpose();
        Vec qv(static_cast<Eigen::Index>(model_.varying_channels.size()));
        for (Eigen::Index k = 0; k < qv.size(); ++k) qv(k) = model_.q(model_.varying_channels[static_cast<std::size_t>(k)]);
        Mat acc = Mat::Zero(model_.dim_x, model_.dim_x);
        for (Eigen::Index i = 0; i < count; ++i) {
          const Mat V = model_.varying_dispersion(sp.points.col(i), t);
          acc += sp.weights(i) * (V * qv.asDiagonal() * V.transpose());
        }
        r.dP.topLeftCorner(model_.dim_x, model_.dim_x) += acc;
      } else {
        r.dP += model_.diffusion(s.m, t);
      }
    }
    if (track_cross_) {
      // P^{-1} E[(x - m) f^T] = sqrt(P)^{-T} * xi_f
      const Mat pinv_exf =
          sp.sqrt_cov.transpose().triangularView<Eigen::Upper>().solve(xi_f);
      r.dC = s.C * pinv_exf;
    }
    return r;
  }

  bool track_cross() const { return track_cross_; }

 private:
  const AugmentedModel& model_;
  CubatureRule rule_;
  bool track_cross_;
};

Moments advance(const Moments& s, const MomentRates& r, double h, bool cross) {
  Moments out{s.m + h * r.dm, s.P + h * r.dP, Mat()};
  if (cross) out.C = s.C + h * r.dC;
  return out;
}

}  // namespace

PredictStep predict(const AugmentedModel& model, const GaussianState& state, double t1,
                    int substeps, bool track_cross) {
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  if (!(t1 > state.t)) throw ConfigError("prediction target time must exceed the state time");
  if (state.m.size() != model.dim) throw DimensionError("state dimension does not match model");

  const MomentOde ode(model, track_cross);
  const double h = (t1 - state.t) / substeps;
  Moments s{state.m, state.P, track_cross ? state.P : Mat()};
  symmetrize(s.P);
  for (int k = 0; k < substeps; ++k) {
    const double t = state.t + k * h;
    const MomentRates k1 = ode(t, s);
    const MomentRates k2 = ode(t + 0.5 * h, advance(s, k1, 0.5 * h, track_cross));
    const MomentRates k3 = ode(t + 0.5 * h, advance(s, k2, 0.5 * h, track_cross));
    const MomentRates k4 = ode(t + h, advance(s, k3, h, track_cross));
    s.m += h / 6.0 * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm);
    s.P += h / 6.0 * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    if (track_cross) s.C += h / 6.0 * (k1.dC + 2.0 * k2.dC + 2.0 * k3.dC + k4.dC);
    symmetrize(s.P);
    if (!s.m.allFinite() || !s.P.allFinite()) {
      throw DivergenceError("prediction divergence", t + h, "non-finite moments");
    }
  }

  PredictStep out;
  out.prior = state;
  out.predicted = GaussianState{t1, std::move(s.m), std::move(s.P)};
  out.C = std::move(s.C);
  return out;
}

double gaussian_logpdf(const Vec& y, const Vec& mu, const Mat& S) {
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success) {
    throw DivergenceError("update divergence", std::numeric_limits<double>::quiet_NaN(),
                          "innovation covariance not positive definite");
  }
  const Vec e = y - mu;
  const Vec z = llt.matrixL().solve(e);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double d = static_cast<double>(y.size());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + logdet + z.squaredNorm());
}

UpdateResult update(const GaussianState& state, const MeasurementModel& meas, const Vec& y) {
  if (y.size() != meas.dim()) throw DimensionError("observation dimension mismatch");
  SigmaPoints sp;
  try {
    sp = sigma_points(state.m, state.P);
  } catch (const SqrtError& e) {
    throw DivergenceError("update divergence", state.t, e.what());
  }
  const Mat hy = evaluate_at(meas.h, sp);
  if (!hy.allFinite()) throw DivergenceError("update divergence", state.t, "non-finite h(x)");

  UpdateResult out;
  out.mu = weighted_column_sum(hy, sp.weights);
  const Mat hc = hy.colwise() - out.mu;
  out.S = hc * sp.weights.asDiagonal() * hc.transpose() + meas.R;
  symmetrize(out.S);
  const Mat D = sp.deviations * sp.weights.asDiagonal() * hc.transpose();

  Eigen::LLT<Mat> llt(out.S);
  if (llt.info() != Eigen::Success) {
    throw DivergenceError("update divergence", state.t, "innovation covariance singular");
  }
  // K = D S^{-1}
  const Mat K = llt.solve(D.transpose()).transpose();
  out.posterior.t = state.t;
  out.posterior.m = state.m + K * (y - out.mu);
  out.posterior.P = state.P - K * out.S * K.transpose();
  symmetrize(out.posterior.P);
  try {
    out.loglik = gaussian_logpdf(y, out.mu, out.S);
  } catch (const DivergenceError&) {
    throw DivergenceError("update divergence", state.t, "innovation covariance singular");
  }
  return out;
}

FilterResult filter(const AugmentedModel& model, const MeasurementModel& meas,
                    const std::vector<Observation>& data, const GaussianState& x0,
                    const FilterOptions& options) {
  if (options.substeps < 1) throw ConfigError("substeps must be >= 1");
  for (std::size_t k = 0; k < data.size(); ++k) {
    const double prev = k == 0 ? x0.t : data[k - 1].t;
    const bool ok = k == 0 ? data[k].t >= prev : data[k].t > prev;
    if (!ok) {
      std::ostringstream msg;
      msg << "observation times must be strictly increasing and not before the prior (index " << k
          << ", t=" << data[k].t << ")";
      throw ConfigError(msg.str());
    }
  }

  FilterResult result;
  result.initial = x0;
  result.has_cross = options.track_cross;
  result.steps.reserve(data.size());
  GaussianState current = x0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Observation& obs = data[k];
    FilterStep step;
    step.t = obs.t;
    try {
      if (obs.t > current.t) {
        PredictStep p = predict(model, current, obs.t, options.substeps, options.track_cross);
        step.m_pred = std::move(p.predicted.m);
        step.P_pred = std::move(p.predicted.P);
        step.C = std::move(p.C);
      } else {
        step.m_pred = current.m;
        step.P_pred = current.P;
        if (options.track_cross) step.C = current.P;
      }
      GaussianState pred{obs.t, step.m_pred, step.P_pred};
      if (obs.y) {
        UpdateResult u = update(pred, meas, *obs.y);
        step.has_measurement = true;
        step.y = *obs.y;
        step.mu = std::move(u.mu);
        step.S = std::move(u.S);
        step.loglik = u.loglik;
        current = std::move(u.posterior);
      } else {
        current = std::move(pred);
      }
    } catch (const DivergenceError& e) {
      std::ostringstream msg;
      msg << "step " << k << ": " << e.what();
      throw DivergenceError(e.kind(), obs.t, msg.str());
    }
    step.m = current.m;
    step.P = current.P;
    result.loglik += step.loglik;
    result.steps.push_back(std::move(step));
  }
  return result;
}

SmootherResult smooth(const FilterResult& result) {
  if (!result.has_cross) throw ConfigError("smoothing requires a filter run with cross covariances");
  const std::size_t n = result.steps.size() + 1;
  SmootherResult out;
  out.times.resize(n);
  out.means.resize(n);
  out.covs.resize(n);
  out.gains.resize(n > 0 ? n - 1 : 0);

  auto filtered_m = [&](std::size_t k) -> const Vec& {
    return k == 0 ? result.initial.m : result.steps[k - 1].m;
  };
  auto filtered_P = [&](std::size_t k) -> const Mat& {
    return k == 0 ? result.initial.P : result.steps[k - 1].P;
  };

  out.times[0] = result.initial.t;
  for (std::size_t k = 1; k < n; ++k) out.times[k] = result.steps[k - 1].t;
  out.means[n - 1] = filtered_m(n - 1);
  out.covs[n - 1] = filtered_P(n - 1);

  for (std::size_t k = n - 1; k-- > 0;) {
    const FilterStep& next = result.steps[k];
    Eigen::LLT<Mat> llt(next.P_pred);
    if (llt.info() != Eigen::Success) {
      throw DivergenceError("smoother divergence", next.t, "singular predicted covariance");
    }
    // G = C P_pred^{-1}
    Mat G = llt.solve(next.C.transpose()).transpose();
    out.means[k] = filtered_m(k) + G * (out.means[k + 1] - next.m_pred);
    out.covs[k] = filtered_P(k) + G * (out.covs[k + 1] - next.P_pred) * G.transpose();
    symmetrize(out.covs[k]);
    out.gains[k] = std::move(G);
  }

  out.max_trace_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    out.max_trace_excess = std::max(out.max_trace_excess, out.covs[k].trace() - filtered_P(k).trace());
  }
  return out;
}

double log_marginal(const ProblemBuilder& builder, const std::vector<Observation>& data,
                    const Vec& theta, int substeps) {
  try {
    const StateSpaceProblem problem = builder(theta);
    const FilterResult r = filter(problem.model, problem.meas, data, problem.x0,
                                  FilterOptions{substeps, false});
    if (!std::isfinite(r.loglik)) return -std::numeric_limits<double>::infinity();
    return r.loglik;
  } catch (const DivergenceError&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const SqrtError&) {
    return -std::numeric_limits<double>::infinity();
  } catch (const ConfigError&) {
    // Parameters the builder rejects (e.g. a non-positive scale).
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace lfm
