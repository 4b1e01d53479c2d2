#include "lfm/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace lfm {

Mat expm(const Mat& A) { return A.exp(); }

Mat solve_lyapunov(const Mat& F, const Mat& Qc) {
  const Eigen::Index n = F.rows();
  const Mat I = Mat::Identity(n, n);
  // vec(F X + X F^T) = (I (x) F + F (x) I) vec(X)
  const Mat K = Eigen::kroneckerProduct(I, F) + Eigen::kroneckerProduct(F, I);
  const Vec rhs = -Eigen::Map<const Vec>(Qc.data(), n * n);
  const Vec x = K.fullPivLu().solve(rhs);
  Mat X = Eigen::Map<const Mat>(x.data(), n, n);
  symmetrize(X);
  return X;
}

bool is_hurwitz(const Mat& F) {
  if (F.size() == 0) return true;
  const Eigen::EigenSolver<Mat> es(F, false);
  return (es.eigenvalues().real().array() < 0.0).all();
}

Mat block_diag(const Mat& A, const Mat& B) {
  Mat out = Mat::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  out.topLeftCorner(A.rows(), A.cols()) = A;
  out.bottomRightCorner(B.rows(), B.cols()) = B;
  return out;
}

bool is_positive_semidefinite(const Mat& P, double tol) {
  if (P.size() == 0) return true;
  if (!P.allFinite()) return false;
  const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (P + P.transpose()), Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

}  // namespace lfm
