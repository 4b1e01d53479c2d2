#pragma once

#include "lfm/types.hpp"

#include <vector>

namespace lfm {

/// Half-integer Matérn smoothness orders with a finite-dimensional state-space form.
enum class MaternOrder { Half = 1, ThreeHalves = 2, FiveHalves = 3 };

/// Parses nu in {0.5, 1.5, 2.5}; anything else throws ConfigError.
MaternOrder matern_order_from_nu(double nu);
double nu_value(MaternOrder order);

struct MaternSpec {
  MaternOrder order = MaternOrder::ThreeHalves;
  double sigma = 1.0;  ///< process standard deviation
  double ell = 1.0;    ///< length scale

  /// State dimension p = nu + 1/2.
  int state_dim() const { return static_cast<int>(order); }
  void validate() const;
};

MaternSpec make_matern(double nu, double sigma, double ell);

struct ResonatorSpec {
  double f0 = 1.0;
  int n_harmonics = 1;
  std::vector<double> q_per_harmonic;  ///< one spectral density per harmonic
  double bias = 0.0;
  bool estimate_bias = false;  ///< adds a constant state carrying the bias
  double bias_var = 0.0;       ///< prior variance of that state
  double q_eps = 0.0;          ///< white residual on the emitted force
  double prior_var = 1.0;      ///< sigma_c^2 of the oscillator positions

  void validate() const;
};

/// One linear time-invariant SDE block dz = F z dt + L dbeta, with E[dbeta dbeta^T] = diag(q) dt.
struct LtiSde {
  enum class Kind { Matern, Resonator, Constant };

  Kind kind = Kind::Matern;
  Mat F;
  Mat L;
  Vec q;
  RowVec emit;        ///< force value u = emit * z + offset
  double offset = 0.0;

  /// Prior for this block. Matérn blocks use their stationary covariance.
  Vec prior_mean;
  Mat prior_cov;

  /// Spectral density of a white residual added to the emitted force (resonators only).
  double q_eps = 0.0;

  Eigen::Index dim() const { return F.rows(); }
  void check_dimensions() const;
};

LtiSde matern_to_sde(const MaternSpec& spec);

/// Solves F P + P F^T + L diag(q) L^T = 0. Throws ConfigError for non-Hurwitz F.
Mat stationary_covariance(const LtiSde& sde);

/// Closed-form Matérn covariance k(tau).
double matern_kernel(const MaternSpec& spec, double tau);

/// Model autocovariance emit P_inf expm(F tau)^T emit^T of a stable block.
double sde_autocovariance(const LtiSde& sde, double tau);

/// Bank of undamped oscillators at harmonics n*f0, optionally followed by one bias state.
LtiSde resonator_to_sde(const ResonatorSpec& spec);

}  // namespace lfm
