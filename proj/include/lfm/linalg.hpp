#pragma once

#include "lfm/types.hpp"

namespace lfm {

/// (P + P^T) / 2
inline void symmetrize(Mat& P) {
  const Mat avg = 0.5 * (P + P.transpose());
  P = avg;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < P.cols(); ++j) P(j, i) = P(i, j);
  }
}

Mat expm(const Mat& A);

/// Solves F X + X F^T + Qc = 0 by the Kronecker-sum vectorization.
Mat solve_lyapunov(const Mat& F, const Mat& Qc);

/// True when every eigenvalue of F has strictly negative real part.
bool is_hurwitz(const Mat& F);

/// Block-diagonal concatenation.
Mat block_diag(const Mat& A, const Mat& B);

bool is_positive_semidefinite(const Mat& P, double tol = 1e-12);

}  // namespace lfm
