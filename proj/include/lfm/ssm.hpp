#pragma once

#include "lfm/gp_sde.hpp"
#include "lfm/rng.hpp"
#include "lfm/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace lfm {

/// Mechanistic part of a latent force model: dx = f(x, u, t) dt + L_x(x, t) dbeta_x.
struct MechanisticModel {
  Eigen::Index dim_x = 0;
  Eigen::Index n_forces = 0;
  std::function<Vec(const Vec& x, const Vec& u, double t)> drift;

  /// dim_x x q.size() dispersion. Unset means no mechanistic noise.
  std::function<Mat(const Vec& x, double t)> dispersion;
  Vec q;

  /// df/du (dim_x x n_forces). Needed only when a force block has a white residual.
  std::function<Mat(const Vec& x, double t)> input_gain;

  /// True when dispersion or input_gain depend on x.
  bool state_dependent_dispersion = false;
};

struct ForceBlock {
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
  Eigen::Index u_index = 0;
  LtiSde sde;
};

/// Augmented state x_a = (x, z_1, ..., z_R) with drift f_a and dispersion L_a.
struct AugmentedModel {
  Eigen::Index dim = 0;
  Eigen::Index dim_x = 0;
  Eigen::Index n_forces = 0;
  std::vector<ForceBlock> blocks;
  Mat emit;         ///< n_forces x dim
  Vec emit_offset;  ///< n_forces
  Vec q;            ///< diagonal of the diffusion matrix Q
  bool state_dependent_dispersion = false;

  std::function<Vec(const Vec& xa, double t)> drift;
  std::function<Mat(const Vec& xa, double t)> dispersion;  ///< dim x q.size()

  /// Channels whose dispersion columns vary with the state. They drive only the first
  /// dim_x rows; varying_dispersion returns those rows (dim_x x varying_channels.size()).
  std::vector<Eigen::Index> varying_channels;
  std::function<Mat(const Vec& xa, double t)> varying_dispersion;

  Vec forces(const Vec& xa) const { return emit * xa + emit_offset; }

  /// L Q L^T at a point.
  Mat diffusion(const Vec& xa, double t) const;

  Eigen::Index noise_dim() const { return q.size(); }

  /// dx = F x dt + L dbeta with diag(q) diffusion and no mechanistic/force split.
  static AugmentedModel linear(const Mat& F, const Mat& L, const Vec& q);
};

/// Maps force block i into u[coupling[i]]; blocks sharing an index are summed.
AugmentedModel augment(const MechanisticModel& mech, const std::vector<LtiSde>& forces,
                       const std::vector<Eigen::Index>& coupling);

/// Convenience: block i drives u[i].
AugmentedModel augment(const MechanisticModel& mech, const std::vector<LtiSde>& forces);

struct MeasurementModel {
  std::function<Vec(const Vec& xa)> h;
  Mat R;

  Eigen::Index dim() const { return R.rows(); }
  void validate() const;

  static MeasurementModel linear(const Mat& H, const Mat& R);
};

struct GaussianState {
  double t = 0.0;
  Vec m;
  Mat P;
};

/// Block-diagonal prior: mechanistic block as given, force blocks at their configured prior.
GaussianState initial_state(const AugmentedModel& model, const Vec& mech_mean,
                            const Mat& mech_cov, double t0 = 0.0);

struct Trajectory {
  std::vector<double> times;
  Mat states;  ///< dim x times.size()
};

/// Euler-Maruyama from x at t0 to t1 in `substeps` equal steps.
Vec propagate(const AugmentedModel& model, const Vec& x, double t0, double t1, int substeps,
              Rng& rng);

/// Euler-Maruyama sample path recorded on `times` (times[0] is the start time of x0).
Trajectory simulate(const AugmentedModel& model, const Vec& x0,
                    const std::vector<double>& times, std::uint64_t seed, int substeps = 10);
Trajectory simulate(const AugmentedModel& model, const Vec& x0,
                    const std::vector<double>& times, Rng& rng, int substeps = 10);

/// Draws a sample from N(m, P).
Vec sample_gaussian(const Vec& m, const Mat& P, Rng& rng);

void check_strictly_increasing(const std::vector<double>& times, const char* what);

}  // namespace lfm
