#pragma once

#include <Eigen/Dense>

namespace mrplab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Singular values above `threshold` count toward the rank. A value within one
// decade of the threshold on either side makes the decision marginal.
struct RankInfo {
  int rank = 0;
  bool marginal = false;
  double smallest_kept = 0.0;    // +inf when rank == 0
  double largest_dropped = 0.0;  // 0 when nothing was dropped
};

RankInfo classify_singular_values(const Vector& singular_values, double threshold);

Vector singular_values(const Matrix& a);

bool is_symmetric(const Matrix& a, double tol = 1e-9);

// Moore-Penrose inverse of a symmetric matrix via its eigendecomposition;
// eigenvalues with |lambda| <= rtol * max|lambda| are treated as zero.
Matrix pseudo_inverse(const Matrix& sym, double rtol = 1e-9);

// Unique symmetric PSD square root; tiny negative eigenvalues are clamped.
Matrix psd_sqrt(const Matrix& sym);

// sqrt(B^T B) from the SVD of B. Accurate to rounding in B rather than in
// B^T B, so small singular values are not swamped by cancellation.
Matrix gram_sqrt(const Matrix& b);

// Minimal-norm least-squares solution of a * x = b, discarding singular
// values <= abs_threshold.
Matrix min_norm_solve(const Matrix& a, const Matrix& b, double abs_threshold);

// Orthonormal basis (columns) of the orthogonal complement of a unit vector.
Matrix orthogonal_complement(const Vector& unit);

}  // namespace mrplab
