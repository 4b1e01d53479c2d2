#pragma once

#include "lfm/types.hpp"

#include <functional>
#include <span>

namespace lfm {

/// Unit-space point set and weights for E[f(x)], x ~ N(0, I).
class CubatureRule {
 public:
  /// Third-degree spherical rule: points +-sqrt(n) e_i, weights 1/(2n).
  static CubatureRule spherical(Eigen::Index n);

  CubatureRule(Mat unit_points, Vec weights);

  Eigen::Index dim() const { return points_.rows(); }
  Eigen::Index size() const { return points_.cols(); }
  const Mat& unit_points() const { return points_; }
  const Vec& weights() const { return weights_; }

 private:
  Mat points_;  // dim x size
  Vec weights_;
};

/// Lower Cholesky factor of P. On failure, adds jitter starting at 1e-12 tr(P)/n and
/// escalating by 10x up to 1e-6 tr(P)/n before throwing SqrtError.
Mat cov_sqrt(const Mat& P);

/// Sigma points of N(m, P) under a rule: deviations = sqrt(P) * unit points.
struct SigmaPoints {
  Mat points;      ///< dim x count, m + deviations
  Mat deviations;  ///< dim x count
  Mat sqrt_cov;    ///< lower-triangular factor used
  Vec weights;
};

SigmaPoints sigma_points(const Vec& m, const Mat& P, const CubatureRule& rule);
SigmaPoints sigma_points(const Vec& m, const Mat& P);

/// Mirror-symmetric pairwise summation of the columns of `values` weighted by `w`:
/// reversing the column order gives a bit-identical result.
Vec weighted_column_sum(const Mat& values, const Vec& w);

using VecFn = std::function<Vec(const Vec&)>;

/// Evaluates f at every sigma point; column i holds f(points.col(i)).
Mat evaluate_at(const VecFn& f, const SigmaPoints& sp);

Vec gauss_expect(const VecFn& f, const Vec& m, const Mat& P);
Vec gauss_expect(const VecFn& f, const Vec& m, const Mat& P, const CubatureRule& rule);

/// E[(f(x) - E f)(g(x) - E g)^T] with x ~ N(m, P).
Mat gauss_cross_cov(const VecFn& f, const VecFn& g, const Vec& m, const Mat& P);
Mat gauss_cross_cov(const VecFn& f, const VecFn& g, const Vec& m, const Mat& P,
                    const CubatureRule& rule);

/// Weighted covariance between two sets of evaluations at the same sigma points.
Mat weighted_cross_cov(const Mat& fa, const Vec& mean_a, const Mat& fb, const Vec& mean_b,
                       const Vec& w);

}  // namespace lfm
