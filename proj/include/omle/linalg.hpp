#pragma once

#include <Eigen/Dense>

namespace omle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values at or below this are treated as zero by pseudo-inverses.
inline constexpr double kSvdTol = 1e-10;

/// All singular values in nonincreasing order.
Vector singular_values(const Matrix& m);

/// The k-th largest singular value (k is 1-based). Returns 0 when k exceeds min(rows, cols).
double kth_singular_value(const Matrix& m, int k);

/// Moore-Penrose pseudo-inverse via SVD; singular values <= tol are dropped.
Matrix pseudo_inverse(const Matrix& m, double tol = kSvdTol);

/// Induced l1 -> l1 norm: maximum absolute column sum.
double operator_norm_11(const Matrix& m);

/// Spectral norm (largest singular value).
double operator_norm_2(const Matrix& m);

}  // namespace omle
