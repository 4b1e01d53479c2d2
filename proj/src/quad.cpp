#include "lfm/quad.hpp"

#include <cmath>

namespace lfm {

CubatureRule CubatureRule::spherical(Eigen::Index n) {
  if (n < 1) throw DimensionError("cubature rule needs dimension >= 1");
  Mat pts = Mat::Zero(n, 2 * n);
  const double s = std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    pts(i, i) = s;
    pts(i, n + i) = -s;
  }
  return CubatureRule(std::move(pts), Vec::Constant(2 * n, 1.0 / (2.0 * n)));
}

CubatureRule::CubatureRule(Mat unit_points, Vec weights)
    : points_(std::move(unit_points)), weights_(std::move(weights)) {
  if (points_.cols() != weights_.size() || points_.cols() == 0) {
    throw DimensionError("cubature rule points/weights mismatch");
  }
}

Mat cov_sqrt(const Mat& P) {
  const Eigen::Index n = P.rows();
  if (n == 0) return Mat(0, 0);
  if (!P.allFinite()) throw SqrtError("covariance has non-finite entries");
  Eigen::LLT<Mat> llt(P);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const double base = std::abs(P.trace()) / static_cast<double>(n);
  for (double eps = 1e-12; eps <= 1e-6 * (1.0 + 1e-9); eps *= 10.0) {
    Mat Pj = P;
    Pj.diagonal().array() += eps * base;
    llt.compute(Pj);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw SqrtError("covariance is not positive definite after jitter escalation");
}

SigmaPoints sigma_points(const Vec& m, const Mat& P, const CubatureRule& rule) {
  if (rule.dim() != m.size() || P.rows() != m.size() || P.cols() != m.size()) {
    throw DimensionError("sigma point dimension mismatch");
  }
  SigmaPoints sp;
  sp.sqrt_cov = cov_sqrt(P);
  sp.deviations = sp.sqrt_cov * rule.unit_points();
  sp.points = sp.deviations.colwise() + m;
  sp.weights = rule.weights();
  return sp;
}

SigmaPoints sigma_points(const Vec& m, const Mat& P) {
  return sigma_points(m, P, CubatureRule::spherical(m.size()));
}

namespace {

Vec pairwise(const Mat& values, const Vec& w, Eigen::Index lo, Eigen::Index hi) {
  const Eigen::Index len = hi - lo;
  if (len == 1) return w(lo) * values.col(lo);
  const Eigen::Index half = len / 2;
  Vec s = pairwise(values, w, lo, lo + half) + pairwise(values, w, hi - half, hi);
  if (len % 2 == 1) s += w(lo + half) * values.col(lo + half);
  return s;
}

}  // namespace

Vec weighted_column_sum(const Mat& values, const Vec& w) {
  if (values.cols() != w.size() || w.size() == 0) throw DimensionError("weighted sum mismatch");
  return pairwise(values, w, 0, w.size());
}

Mat evaluate_at(const VecFn& f, const SigmaPoints& sp) {
  const Eigen::Index count = sp.points.cols();
  Vec first = f(sp.points.col(0));
  Mat out(first.size(), count);
  out.col(0) = first;
  for (Eigen::Index i = 1; i < count; ++i) out.col(i) = f(sp.points.col(i));
  return out;
}

Mat weighted_cross_cov(const Mat& fa, const Vec& mean_a, const Mat& fb, const Vec& mean_b,
                       const Vec& w) {
  const Mat da = fa.colwise() - mean_a;
  const Mat db = fb.colwise() - mean_b;
  return da * w.asDiagonal() * db.transpose();
}

Vec gauss_expect(const VecFn& f, const Vec& m, const Mat& P, const CubatureRule& rule) {
  const SigmaPoints sp = sigma_points(m, P, rule);
  return weighted_column_sum(evaluate_at(f, sp), sp.weights);
}

Vec gauss_expect(const VecFn& f, const Vec& m, const Mat& P) {
  return gauss_expect(f, m, P, CubatureRule::spherical(m.size()));
}

Mat gauss_cross_cov(const VecFn& f, const VecFn& g, const Vec& m, const Mat& P,
                    const CubatureRule& rule) {
  const SigmaPoints sp = sigma_points(m, P, rule);
  const Mat fa = evaluate_at(f, sp);
  const Mat gb = evaluate_at(g, sp);
  return weighted_cross_cov(fa, weighted_column_sum(fa, sp.weights), gb,
                            weighted_column_sum(gb, sp.weights), sp.weights);
}

Mat gauss_cross_cov(const VecFn& f, const VecFn& g, const Vec& m, const Mat& P) {
  return gauss_cross_cov(f, g, m, P, CubatureRule::spherical(m.size()));
}

}  // namespace lfm
