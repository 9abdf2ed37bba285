#include "omle/linalg.hpp"

#include <algorithm>

namespace omle {

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

double kth_singular_value(const Matrix& m, int k) {
  const Vector sv = singular_values(m);
  if (k < 1 || k > sv.size()) return 0.0;
  return sv(k - 1);
}

Matrix pseudo_inverse(const Matrix& m, double tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double operator_norm_11(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

double operator_norm_2(const Matrix& m) { return kth_singular_value(m, 1); }

}  // namespace omle
