#include "lfm/ssm.hpp"

#include "lfm/linalg.hpp"
#include "lfm/quad.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace lfm {

Mat AugmentedModel::diffusion(const Vec& xa, double t) const {
  if (q.size() == 0) return Mat::Zero(dim, dim);
  const Mat L = dispersion(xa, t);
  return L * q.asDiagonal() * L.transpose();
}

AugmentedModel AugmentedModel::linear(const Mat& F, const Mat& L, const Vec& q) {
  if (F.rows() != F.cols() || L.rows() != F.rows() || L.cols() != q.size()) {
    throw DimensionError("linear model dimension mismatch");
  }
  AugmentedModel model;
  model.dim = F.rows();
  model.dim_x = F.rows();
  model.emit = Mat::Zero(0, model.dim);
  model.emit_offset = Vec::Zero(0);
  model.q = q;
  model.drift = [F](const Vec& x, double) -> Vec { return F * x; };
  model.dispersion = [L](const Vec&, double) -> Mat { return L; };
  return model;
}

AugmentedModel augment(const MechanisticModel& mech, const std::vector<LtiSde>& forces,
                       const std::vector<Eigen::Index>& coupling) {
  if (coupling.size() != forces.size()) {
    throw DimensionError("coupling must assign one force index per LTI block");
  }
  if (!mech.drift) throw ConfigError("mechanistic model has no drift function");
  const Eigen::Index M = mech.dim_x;
  const Eigen::Index R = mech.n_forces;
  const Eigen::Index wx = mech.q.size();
  if (wx > 0 && !mech.dispersion) throw ConfigError("mechanistic noise without dispersion");

  auto model = AugmentedModel{};
  model.dim_x = M;
  model.n_forces = R;
  Eigen::Index dim = M;
  Eigen::Index w = wx;
  Eigen::Index n_eps = 0;
  for (std::size_t i = 0; i < forces.size(); ++i) {
    forces[i].check_dimensions();
    if (coupling[i] < 0 || coupling[i] >= R) {
      std::ostringstream msg;
      msg << "force block " << i << " wired to u[" << coupling[i] << "] but the mechanistic model has "
          << R << " force inputs";
      throw DimensionError(msg.str());
    }
    ForceBlock b;
    b.offset = dim;
    b.size = forces[i].dim();
    b.u_index = coupling[i];
    b.sde = forces[i];
    dim += b.size;
    w += forces[i].q.size();
    if (forces[i].q_eps > 0.0) ++n_eps;
    model.blocks.push_back(std::move(b));
  }
  if (n_eps > 0 && !mech.input_gain) {
    throw ConfigError("force residual noise requires the mechanistic input gain");
  }
  model.dim = dim;

  model.emit = Mat::Zero(R, dim);
  model.emit_offset = Vec::Zero(R);
  for (const auto& b : model.blocks) {
    model.emit.block(b.u_index, b.offset, 1, b.size) += b.sde.emit;
    model.emit_offset(b.u_index) += b.sde.offset;
  }

  model.q = Vec::Zero(w + n_eps);
  model.q.head(wx) = mech.q;
  {
    Eigen::Index c = wx;
    for (const auto& b : model.blocks) {
      model.q.segment(c, b.sde.q.size()) = b.sde.q;
      c += b.sde.q.size();
    }
    for (const auto& b : model.blocks) {
      if (b.sde.q_eps > 0.0) model.q(c++) = b.sde.q_eps;
    }
  }
  if (mech.state_dependent_dispersion) {
    for (Eigen::Index c = 0; c < wx; ++c) model.varying_channels.push_back(c);
    for (Eigen::Index c = w; c < w + n_eps; ++c) model.varying_channels.push_back(c);
  }
  model.state_dependent_dispersion = !model.varying_channels.empty();

  // Shared immutable copies for the closures.
  auto shared_mech = std::make_shared<const MechanisticModel>(mech);
  auto blocks = std::make_shared<const std::vector<ForceBlock>>(model.blocks);
  const Mat emit = model.emit;
  const Vec offset = model.emit_offset;

  model.drift = [shared_mech, blocks, emit, offset, M, dim](const Vec& xa, double t) -> Vec {
    Vec out(dim);
    const Vec u = emit * xa + offset;
    if (M > 0) out.head(M) = shared_mech->drift(xa.head(M), u, t);
    for (const auto& b : *blocks) {
      out.segment(b.offset, b.size).noalias() = b.sde.F * xa.segment(b.offset, b.size);
    }
    return out;
  };

  const Eigen::Index W = model.q.size();
  // Constant part of L_a: force-block channels.
  Mat L0 = Mat::Zero(dim, W);
  {
    Eigen::Index c = wx;
    for (const auto& b : model.blocks) {
      L0.block(b.offset, c, b.size, b.sde.L.cols()) = b.sde.L;
      c += b.sde.L.cols();
    }
  }
  model.dispersion = [shared_mech, blocks, L0, M, wx, w](const Vec& xa, double t) -> Mat {
    Mat L = L0;
    if (M > 0 && wx > 0) L.topLeftCorner(M, wx) = shared_mech->dispersion(xa.head(M), t);
    Eigen::Index c = w;
    Mat gain;
    for (const auto& b : *blocks) {
      if (b.sde.q_eps <= 0.0) continue;
      if (gain.size() == 0) gain = shared_mech->input_gain(xa.head(M), t);
      L.block(0, c++, M, 1) = gain.col(b.u_index);
    }
    return L;
  };
  if (model.state_dependent_dispersion) {
    const Eigen::Index nv = static_cast<Eigen::Index>(model.varying_channels.size());
    model.varying_dispersion = [shared_mech, blocks, M, wx, nv](const Vec& xa, double t) -> Mat {
      Mat V(M, nv);
      if (wx > 0) V.leftCols(wx) = shared_mech->dispersion(xa.head(M), t);
      Eigen::Index c = wx;
      Mat gain;
      for (const auto& b : *blocks) {
        if (b.sde.q_eps <= 0.0) continue;
        if (gain.size() == 0) gain = shared_mech->input_gain(xa.head(M), t);
        V.col(c++) = gain.col(b.u_index);
      }
      return V;
    };
  }
  return model;
}

AugmentedModel augment(const MechanisticModel& mech, const std::vector<LtiSde>& forces) {
  std::vector<Eigen::Index> coupling(forces.size());
  for (std::size_t i = 0; i < forces.size(); ++i) coupling[i] = static_cast<Eigen::Index>(i);
  return augment(mech, forces, coupling);
}

void MeasurementModel::validate() const {
  if (!h) throw ConfigError("measurement model has no function");
  if (R.rows() != R.cols() || R.rows() == 0) throw DimensionError("measurement noise must be square");
  if (!R.isApprox(R.transpose())) throw ConfigError("measurement noise must be symmetric");
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) throw ConfigError("measurement noise must be positive definite");
}

MeasurementModel MeasurementModel::linear(const Mat& H, const Mat& R) {
  if (H.rows() != R.rows()) throw DimensionError("H and R row counts differ");
  MeasurementModel meas;
  meas.h = [H](const Vec& x) -> Vec { return H * x; };
  meas.R = R;
  return meas;
}

GaussianState initial_state(const AugmentedModel& model, const Vec& mech_mean,
                            const Mat& mech_cov, double t0) {
  if (mech_mean.size() != model.dim_x || mech_cov.rows() != model.dim_x ||
      mech_cov.cols() != model.dim_x) {
    throw DimensionError("mechanistic prior does not match the model's output-state dimension");
  }
  if (!mech_cov.isApprox(mech_cov.transpose()) || !is_positive_semidefinite(mech_cov)) {
    throw ConfigError("mechanistic prior covariance is not positive semi-definite");
  }
  GaussianState s;
  s.t = t0;
  s.m = Vec::Zero(model.dim);
  s.P = Mat::Zero(model.dim, model.dim);
  s.m.head(model.dim_x) = mech_mean;
  s.P.topLeftCorner(model.dim_x, model.dim_x) = mech_cov;
  for (const auto& b : model.blocks) {
    s.m.segment(b.offset, b.size) = b.sde.prior_mean;
    s.P.block(b.offset, b.offset, b.size, b.size) = b.sde.prior_cov;
  }
  return s;
}

Vec sample_gaussian(const Vec& m, const Mat& P, Rng& rng) {
  std::normal_distribution<double> normal;
  Vec z(m.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  // LDLT tolerates singular (e.g. known) components.
  Eigen::LDLT<Mat> ldlt(P);
  const Vec d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Vec y = d.asDiagonal() * z;
  y = ldlt.matrixL() * y;
  y = ldlt.transpositionsP().transpose() * y;
  return m + y;
}

void check_strictly_increasing(const std::vector<double>& times, const char* what) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      std::ostringstream msg;
      msg << what << " times must be strictly increasing (index " << i << ")";
      throw ConfigError(msg.str());
    }
  }
}

Vec propagate(const AugmentedModel& model, const Vec& x, double t0, double t1, int substeps,
              Rng& rng) {
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  const double dt = (t1 - t0) / substeps;
  const double sdt = std::sqrt(dt);
  const Eigen::Index W = model.q.size();
  const Vec qs = model.q.cwiseMax(0.0).cwiseSqrt();
  std::normal_distribution<double> normal;
  Mat L_const;
  if (W > 0 && !model.state_dependent_dispersion) L_const = model.dispersion(x, t0);

  Vec state = x;
  Vec dbeta(W);
  for (int s = 0; s < substeps; ++s) {
    const double t = t0 + s * dt;
    Vec next = state + model.drift(state, t) * dt;
    if (W > 0) {
      for (Eigen::Index j = 0; j < W; ++j) dbeta(j) = qs(j) * sdt * normal(rng);
      if (model.state_dependent_dispersion) {
        next.noalias() += model.dispersion(state, t) * dbeta;
      } else {
        next.noalias() += L_const * dbeta;
      }
    }
    if (!next.allFinite()) {
      throw DivergenceError("simulation blow-up", t + dt, "non-finite state");
    }
    state = std::move(next);
  }
  return state;
}

Trajectory simulate(const AugmentedModel& model, const Vec& x0,
                    const std::vector<double>& times, Rng& rng, int substeps) {
  if (x0.size() != model.dim) throw DimensionError("initial state dimension mismatch");
  if (times.empty()) throw ConfigError("simulation needs at least one time point");
  check_strictly_increasing(times, "simulation");
  Trajectory traj;
  traj.times = times;
  traj.states.resize(model.dim, static_cast<Eigen::Index>(times.size()));
  traj.states.col(0) = x0;
  Vec x = x0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    x = propagate(model, x, times[k - 1], times[k], substeps, rng);
    traj.states.col(static_cast<Eigen::Index>(k)) = x;
  }
  return traj;
}

Trajectory simulate(const AugmentedModel& model, const Vec& x0,
                    const std::vector<double>& times, std::uint64_t seed, int substeps) {
  Rng rng(seed);
  return simulate(model, x0, times, rng, substeps);
}

}  // namespace lfm
