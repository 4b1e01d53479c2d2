#pragma once

#include "lfm/rng.hpp"
#include "lfm/ssm.hpp"

#include <string>

namespace lfm::models {

/// Non-linear response of a gene to the transcription factor level.
enum class TfLink { Saturation, Repression, Exponential };

TfLink parse_tf_link(const std::string& name);
std::string to_string(TfLink link);

/// Exponential responses are evaluated at min(u, kExpClamp).
inline constexpr double kExpClamp = 30.0;

double tf_link(TfLink link, double gamma, double u);

struct TfParams {
  Vec basal;        ///< B_j
  Vec decay;        ///< D_j
  Vec initial;      ///< A_j, the known gene levels at t = 0
  Mat sensitivity;  ///< S_{j,r}, genes x forces
  TfLink link = TfLink::Saturation;
  double gamma = 1.0;

  Eigen::Index genes() const { return basal.size(); }
  Eigen::Index forces() const { return sensitivity.cols(); }
  void validate() const;
};

/// dx_j/dt = B_j + sum_r S_{j,r} g(u_r) - D_j x_j
Vec tf_drift(const TfParams& params, const Vec& x, const Vec& u);

MechanisticModel tf_mechanistic(const TfParams& params);

/// Replication draw: B ~ U(0, 0.1), D ~ U(0, 2), A ~ U(-0.1, 0.1), S ~ U(0, 1).
TfParams sample_tf_params(Eigen::Index genes, Eigen::Index forces, TfLink link, double gamma,
                          Rng& rng);

}  // namespace lfm::models
