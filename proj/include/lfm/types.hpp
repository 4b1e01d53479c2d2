#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lfm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model or experiment configuration; detected before any computation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown of an inference or simulation run at a known time.
class DivergenceError : public Error {
 public:
  DivergenceError(std::string kind, double t, const std::string& detail = {})
      : Error(kind + " at t=" + std::to_string(t) + (detail.empty() ? "" : ": " + detail)),
        kind_(std::move(kind)),
        time_(t) {}

  const std::string& kind() const noexcept { return kind_; }
  double time() const noexcept { return time_; }

 private:
  std::string kind_;
  double time_;
};

/// Matrix square root failed even after the full jitter escalation.
class SqrtError : public Error {
 public:
  using Error::Error;
};

}  // namespace lfm
