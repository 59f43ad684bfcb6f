#include "mrplab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mrplab {

RankInfo classify_singular_values(const Vector& sv, double threshold) {
  RankInfo info;
  info.smallest_kept = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double s = sv[i];
    if (s > threshold) {
      ++info.rank;
      info.smallest_kept = std::min(info.smallest_kept, s);
    } else {
      info.largest_dropped = std::max(info.largest_dropped, s);
    }
    if (threshold > 0.0 && s > threshold / 10.0 && s < threshold * 10.0) info.marginal = true;
  }
  return info;
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  return Eigen::JacobiSVD<Matrix>(a).singularValues();
}

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix pseudo_inverse(const Matrix& sym, double rtol) {
  if (!is_symmetric(sym)) throw std::invalid_argument("pseudo_inverse: matrix is not symmetric");
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sym + sym.transpose()));
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = rtol * lambda.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (std::abs(lambda[i]) > cutoff) inv[i] = 1.0 / lambda[i];
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix psd_sqrt(const Matrix& sym) {
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sym + sym.transpose()));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix gram_sqrt(const Matrix& b) {
  if (b.cols() == 0) return Matrix::Zero(0, 0);
  if (b.rows() == 0) return Matrix::Zero(b.cols(), b.cols());
  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinV);
  const Matrix& v = svd.matrixV();
  Matrix r = v * svd.singularValues().asDiagonal() * v.transpose();
  return 0.5 * (r + r.transpose());
}

Matrix min_norm_solve(const Matrix& a, const Matrix& b, double abs_threshold) {
  Matrix x = Matrix::Zero(a.cols(), b.cols());
  if (a.size() == 0) return x;
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > abs_threshold) inv[i] = 1.0 / s[i];
  x = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * b);
  return x;
}

Matrix orthogonal_complement(const Vector& unit) {
  const Eigen::Index k = unit.size();
  Matrix a(k, k);
  a.col(0) = unit;
  a.rightCols(k - 1) = Matrix::Identity(k, k).leftCols(k - 1);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(k, k);
  return q.rightCols(k - 1);
}

}  // namespace mrplab
