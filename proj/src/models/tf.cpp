#include "lfm/models/tf.hpp"

#include <algorithm>
#include <cmath>

namespace lfm::models {

TfLink parse_tf_link(const std::string& name) {
  if (name == "saturation") return TfLink::Saturation;
  if (name == "repression") return TfLink::Repression;
  if (name == "exponential") return TfLink::Exponential;
  throw ConfigError("unknown TF link '" + name + "' (saturation | repression | exponential)");
}

std::string to_string(TfLink link) {
  switch (link) {
    case TfLink::Saturation:
      return "saturation";
    case TfLink::Repression:
      return "repression";
    case TfLink::Exponential:
      return "exponential";
  }
  return "?";
}

double tf_link(TfLink link, double gamma, double u) {
  switch (link) {
    case TfLink::Saturation:
      // e^u / (gamma + e^u) without overflow for large u
      return 1.0 / (1.0 + gamma * std::exp(-u));
    case TfLink::Repression:
      return 1.0 / (gamma + std::exp(u));
    case TfLink::Exponential:
      return std::exp(std::min(u, kExpClamp));
  }
  return 0.0;
}

void TfParams::validate() const {
  const auto n = basal.size();
  if (decay.size() != n || initial.size() != n || sensitivity.rows() != n) {
    throw DimensionError("TF parameter vectors must all have one entry per gene");
  }
  if ((decay.array() < 0.0).any()) throw ConfigError("TF decay rates must be non-negative");
  if (link != TfLink::Exponential && !(gamma > 0.0)) throw ConfigError("TF gamma must be > 0");
}

Vec tf_drift(const TfParams& p, const Vec& x, const Vec& u) {
  Vec g(u.size());
  for (Eigen::Index r = 0; r < u.size(); ++r) g(r) = tf_link(p.link, p.gamma, u(r));
  return p.basal + p.sensitivity * g - p.decay.cwiseProduct(x);
}

MechanisticModel tf_mechanistic(const TfParams& params) {
  params.validate();
  MechanisticModel mech;
  mech.dim_x = params.genes();
  mech.n_forces = params.forces();
  mech.drift = [params](const Vec& x, const Vec& u, double) { return tf_drift(params, x, u); };
  return mech;
}

TfParams sample_tf_params(Eigen::Index genes, Eigen::Index forces, TfLink link, double gamma,
                          Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TfParams p;
  p.basal.resize(genes);
  p.decay.resize(genes);
  p.initial.resize(genes);
  p.sensitivity.resize(genes, forces);
  for (Eigen::Index j = 0; j < genes; ++j) {
    p.basal(j) = 0.1 * unit(rng);
    p.decay(j) = 2.0 * unit(rng);
    p.initial(j) = -0.1 + 0.2 * unit(rng);
    for (Eigen::Index r = 0; r < forces; ++r) p.sensitivity(j, r) = unit(rng);
  }
  p.link = link;
  p.gamma = gamma;
  return p;
}

}  // namespace lfm::models
