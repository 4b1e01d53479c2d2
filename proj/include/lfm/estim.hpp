#pragma once

#include "lfm/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace lfm::estim {

enum class Transform { Identity, Log };

struct Parameter {
  std::string name;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  Transform transform = Transform::Identity;
};

/// Named, bounded parameters with a bijection to an unconstrained scale.
class ParamSpace {
 public:
  ParamSpace() = default;
  explicit ParamSpace(std::vector<Parameter> params);

  /// Log transform when lower >= 0, identity otherwise.
  void add(std::string name, double lower, double upper);
  void add(Parameter p);

  std::size_t size() const { return params_.size(); }
  const std::vector<Parameter>& params() const { return params_; }
  std::vector<std::string> names() const;

  Vec to_unconstrained(const Vec& natural) const;
  Vec to_natural(const Vec& unconstrained) const;
  bool contains(const Vec& natural) const;
  Vec clamp(const Vec& natural) const;

 private:
  std::vector<Parameter> params_;
};

using Objective = std::function<double(const Vec& natural)>;

struct MaximizeOptions {
  int max_evaluations = 400;  ///< per start
  int restarts = 3;           ///< jittered starts in addition to theta0
  double jitter = 0.3;        ///< restart spread on the unconstrained scale
  double initial_step = 0.5;  ///< simplex edge on the unconstrained scale
  double tolerance = 1e-8;    ///< on the spread of simplex values
  std::uint64_t seed = 0;
};

struct MaximizeResult {
  Vec theta;  ///< natural scale, inside the bounds
  double value = -std::numeric_limits<double>::infinity();
  bool converged = false;
  bool on_boundary = false;
  int evaluations = 0;
  std::vector<double> best_trace;  ///< best value after each evaluation
};

/// Nelder-Mead on the unconstrained scale. Points outside the bounds are evaluated at the
/// clamped point minus a distance penalty, so the result always lies within the bounds.
MaximizeResult maximize(const Objective& objective, const ParamSpace& space, const Vec& theta0,
                        const MaximizeOptions& options = {});

struct McmcChain {
  Mat unconstrained;  ///< n_samples x dim
  Mat natural;
  Vec logpost;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;

  /// Posterior mean/std on the natural scale after discarding a leading fraction.
  Vec mean(double burn_in_fraction = 0.05) const;
  Vec stddev(double burn_in_fraction = 0.05) const;
};

/// Gaussian random-walk Metropolis on the unconstrained scale. The target is taken as a
/// density on that scale (flat prior there by default).
McmcChain rw_metropolis(const Objective& logpost, const ParamSpace& space, const Vec& theta0,
                        int n_samples, const Vec& step_scales, std::uint64_t seed);

}  // namespace lfm::estim
