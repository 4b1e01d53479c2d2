#include "lfm/gp_sde.hpp"

#include "lfm/linalg.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace lfm {

MaternOrder matern_order_from_nu(double nu) {
  if (nu == 0.5) return MaternOrder::Half;
  if (nu == 1.5) return MaternOrder::ThreeHalves;
  if (nu == 2.5) return MaternOrder::FiveHalves;
  std::ostringstream msg;
  msg << "unsupported Matern smoothness nu=" << nu << " (supported: 0.5, 1.5, 2.5)";
  throw ConfigError(msg.str());
}

double nu_value(MaternOrder order) { return static_cast<int>(order) - 0.5; }

void MaternSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("Matern sigma must be > 0");
  if (!(ell > 0.0) || !std::isfinite(ell)) throw ConfigError("Matern length scale must be > 0");
  const int p = state_dim();
  if (p < 1 || p > 3) throw ConfigError("unsupported Matern order");
}

MaternSpec make_matern(double nu, double sigma, double ell) {
  MaternSpec spec{matern_order_from_nu(nu), sigma, ell};
  spec.validate();
  return spec;
}

void ResonatorSpec::validate() const {
  if (!(f0 > 0.0)) throw ConfigError("resonator base frequency must be > 0");
  if (n_harmonics < 1) throw ConfigError("resonator needs at least one harmonic");
  if (static_cast<int>(q_per_harmonic.size()) != n_harmonics) {
    throw ConfigError("resonator q_per_harmonic must have n_harmonics entries");
  }
  for (double q : q_per_harmonic) {
    if (!(q >= 0.0)) throw ConfigError("resonator spectral densities must be >= 0");
  }
  if (!(q_eps >= 0.0)) throw ConfigError("resonator q_eps must be >= 0");
  if (!(prior_var > 0.0)) throw ConfigError("resonator prior variance must be > 0");
  if (estimate_bias && !(bias_var >= 0.0)) throw ConfigError("bias variance must be >= 0");
}

void LtiSde::check_dimensions() const {
  const auto p = F.rows();
  if (F.cols() != p || L.rows() != p || q.size() != L.cols() || emit.size() != p ||
      prior_mean.size() != p || prior_cov.rows() != p || prior_cov.cols() != p) {
    throw DimensionError("inconsistent LTI SDE block dimensions");
  }
}

LtiSde matern_to_sde(const MaternSpec& spec) {
  spec.validate();
  const int p = spec.state_dim();
  const double lambda = std::sqrt(2.0 * nu_value(spec.order)) / spec.ell;
  const double s2 = spec.sigma * spec.sigma;

  // Characteristic polynomial (s + lambda)^p.
  Vec a(p);
  double q = 0.0;
  switch (spec.order) {
    case MaternOrder::Half:
      a << lambda;
      q = 2.0 * s2 * lambda;
      break;
    case MaternOrder::ThreeHalves:
      a << lambda * lambda, 2.0 * lambda;
      q = 4.0 * s2 * std::pow(lambda, 3);
      break;
    case MaternOrder::FiveHalves:
      a << std::pow(lambda, 3), 3.0 * lambda * lambda, 3.0 * lambda;
      q = 16.0 / 3.0 * s2 * std::pow(lambda, 5);
      break;
  }

  LtiSde sde;
  sde.kind = LtiSde::Kind::Matern;
  sde.F = Mat::Zero(p, p);
  for (int i = 0; i + 1 < p; ++i) sde.F(i, i + 1) = 1.0;
  sde.F.row(p - 1) = -a.transpose();
  sde.L = Mat::Zero(p, 1);
  sde.L(p - 1, 0) = 1.0;
  sde.q = Vec::Constant(1, q);
  sde.emit = RowVec::Zero(p);
  sde.emit(0) = 1.0;
  sde.prior_mean = Vec::Zero(p);
  sde.prior_cov = stationary_covariance(sde);
  return sde;
}

Mat stationary_covariance(const LtiSde& sde) {
  if (!is_hurwitz(sde.F)) {
    throw ConfigError("stationary covariance requested for a non-Hurwitz drift matrix");
  }
  const Mat Qc = sde.L * sde.q.asDiagonal() * sde.L.transpose();
  return solve_lyapunov(sde.F, Qc);
}

double matern_kernel(const MaternSpec& spec, double tau) {
  const double s2 = spec.sigma * spec.sigma;
  const double r = std::abs(tau) / spec.ell;
  switch (spec.order) {
    case MaternOrder::Half:
      return s2 * std::exp(-r);
    case MaternOrder::ThreeHalves: {
      const double z = std::sqrt(3.0) * r;
      return s2 * (1.0 + z) * std::exp(-z);
    }
    case MaternOrder::FiveHalves: {
      const double z = std::sqrt(5.0) * r;
      return s2 * (1.0 + z + z * z / 3.0) * std::exp(-z);
    }
  }
  return 0.0;
}

double sde_autocovariance(const LtiSde& sde, double tau) {
  const Mat Pinf = stationary_covariance(sde);
  const Mat Phi = expm(sde.F * std::abs(tau));
  return (sde.emit * Pinf * Phi.transpose() * sde.emit.transpose())(0, 0);
}

LtiSde resonator_to_sde(const ResonatorSpec& spec) {
  spec.validate();
  const int n = spec.n_harmonics;
  const int p = 2 * n + (spec.estimate_bias ? 1 : 0);

  LtiSde sde;
  sde.kind = LtiSde::Kind::Resonator;
  sde.F = Mat::Zero(p, p);
  sde.L = Mat::Zero(p, n);
  sde.q = Vec::Zero(n);
  sde.emit = RowVec::Zero(p);
  sde.prior_mean = Vec::Zero(p);
  sde.prior_cov = Mat::Zero(p, p);
  for (int k = 0; k < n; ++k) {
    const double omega = 2.0 * std::numbers::pi * (k + 1) * spec.f0;
    const int o = 2 * k;
    sde.F(o, o + 1) = 1.0;
    sde.F(o + 1, o) = -omega * omega;
    sde.L(o + 1, k) = 1.0;
    sde.q(k) = spec.q_per_harmonic[k];
    sde.emit(o) = 1.0;
    // derivative state carries omega * amplitude
    sde.prior_cov(o, o) = spec.prior_var;
    sde.prior_cov(o + 1, o + 1) = spec.prior_var * omega * omega;
  }
  if (spec.estimate_bias) {
    sde.emit(p - 1) = 1.0;
    sde.prior_mean(p - 1) = spec.bias;
    sde.prior_cov(p - 1, p - 1) = spec.bias_var;
  } else {
    sde.offset = spec.bias;
  }
  sde.q_eps = spec.q_eps;
  return sde;
}

}  // namespace lfm
