#pragma once

#include <Eigen/Dense>

#include <string>

namespace skewar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Throws ValidationError naming `what` unless m is square, finite and
// symmetric to within a relative tolerance.
void require_symmetric(const Matrix& m, const std::string& what);

// Symmetric and Cholesky-factorizable.
void require_spd(const Matrix& m, const std::string& what);

bool is_spd(const Matrix& m);

// Mean and covariance of a (possibly moment-matched) multivariate normal.
struct GaussianMoments {
  Vector mean;
  Matrix cov;
};

// m <- (m + m^T) / 2
inline void symmetrize(Matrix& m) { m = (0.5 * (m + m.transpose())).eval(); }

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Inverse of an SPD matrix through its Cholesky factor. Returns false when
// the factorization fails.
bool spd_inverse(const Matrix& m, Matrix& inverse);

// Lower Cholesky factor. Throws ValidationError naming `what` if m is not SPD.
Matrix cholesky_lower(const Matrix& m, const std::string& what);

// Lower-triangular L with positive diagonal and L L^T = M M^T, computed by a
// QR factorization of M^T without forming M M^T. M may have more columns
// than rows. Throws NumericalError if M M^T is singular.
Matrix lower_factor_of_gram(const Matrix& M);

// Some S with S S^T = Q for a symmetric positive semidefinite Q; negative
// eigenvalues within rounding are clamped to zero.
Matrix psd_sqrt(const Matrix& q);

// Square, finite, lower triangular, strictly positive diagonal.
bool is_lower_factor(const Matrix& L);

}  // namespace skewar
