#pragma once

#include "lfm/cdgauss.hpp"
#include "lfm/estim.hpp"
#include "lfm/ssm.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace lfm::app {

/// Ground truth on the evaluation grid and the data the filter consumes.
struct SyntheticRun {
  Trajectory truth;               ///< augmented states; truth.times is the evaluation grid
  std::vector<Observation> data;  ///< evaluation grid after t0, measured where y is set
};

/// One replication of a model family: a fixed model instance plus its own random stream.
class Scenario {
 public:
  virtual ~Scenario() = default;

  virtual std::string family() const = 0;
  virtual Eigen::Index measurement_dim() const = 0;
  virtual int substeps() const = 0;  ///< RK4 steps per filtering leg

  /// Free parameters for fit/mcmc, their generating values, and the model they induce.
  virtual estim::ParamSpace parameters() const = 0;
  virtual Vec true_parameters() const = 0;
  virtual StateSpaceProblem problem(const Vec& theta) const = 0;

  virtual SyntheticRun simulate() const = 0;
};

}  // namespace lfm::app
