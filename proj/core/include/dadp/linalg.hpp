#pragma once

#include <Eigen/Dense>

namespace dadp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Number of distinct entries of a symmetric n x n matrix.
constexpr Eigen::Index tri_size(Eigen::Index n) { return n * (n + 1) / 2; }

/// Half-vectorization of the quadratic monomials of y:
/// (y1^2, y1 y2, ..., y1 yn, y2^2, y2 y3, ..., yn^2).
Vector mu(const Eigen::Ref<const Vector>& y);

/// Weighted half-vectorization of a symmetric matrix, in the order used by
/// mu(): diagonal entries once, off-diagonal entries doubled. Satisfies
/// mu(y).dot(nu(X)) == y' X y. Throws NotSymmetric when X is not symmetric
/// within 1e-10 relative.
Vector nu(const Eigen::Ref<const Matrix>& X);

/// Inverse of nu(): rebuilds the symmetric matrix.
Matrix nu_inverse(const Eigen::Ref<const Vector>& v, Eigen::Index n);

/// Column-stacking vectorization.
Vector vec(const Eigen::Ref<const Matrix>& X);
Matrix vec_inverse(const Eigen::Ref<const Vector>& v, Eigen::Index rows,
                   Eigen::Index cols);

/// Position of entry (i, j), i <= j, inside mu()/nu() vectors.
Eigen::Index tri_index(Eigen::Index i, Eigen::Index j, Eigen::Index n);

Matrix kron(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b);

Matrix symmetrize(const Eigen::Ref<const Matrix>& X);
bool is_symmetric(const Eigen::Ref<const Matrix>& X, double rel_tol = 1e-10);

// Eigenvalue helpers for symmetric arguments.
double lambda_min(const Eigen::Ref<const Matrix>& S);
double lambda_max(const Eigen::Ref<const Matrix>& S);

double spectral_norm(const Eigen::Ref<const Matrix>& X);

/// lambda_min(S) > tol * (1 + ||S||_2).
bool is_positive_definite(const Eigen::Ref<const Matrix>& S, double tol);

bool all_finite(const Eigen::Ref<const Matrix>& X);

}  // namespace dadp
