#include "dadp/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include "dadp/errors.hpp"

namespace dadp {

Vector mu(const Eigen::Ref<const Vector>& y) {
  const Eigen::Index n = y.size();
  Vector out(tri_size(n));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) out(k++) = y(i) * y(j);
  }
  return out;
}

Vector nu(const Eigen::Ref<const Matrix>& X) {
  if (X.rows() != X.cols()) {
    throw DimensionMismatch("nu: matrix must be square");
  }
  if (!is_symmetric(X)) throw NotSymmetric("nu: matrix is not symmetric");
  const Eigen::Index n = X.rows();
  Vector out(tri_size(n));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out(k++) = X(i, i);
    for (Eigen::Index j = i + 1; j < n; ++j) out(k++) = X(i, j) + X(j, i);
  }
  return out;
}

Matrix nu_inverse(const Eigen::Ref<const Vector>& v, Eigen::Index n) {
  if (v.size() != tri_size(n)) {
    throw DimensionMismatch("nu_inverse: vector length is not n(n+1)/2");
  }
  Matrix X(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, i) = v(k++);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      X(i, j) = X(j, i) = 0.5 * v(k++);
    }
  }
  return X;
}

Vector vec(const Eigen::Ref<const Matrix>& X) {
  Vector out(X.size());
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) out(k++) = X(r, c);
  }
  return out;
}

Matrix vec_inverse(const Eigen::Ref<const Vector>& v, Eigen::Index rows,
                   Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw DimensionMismatch("vec_inverse: length does not match shape");
  }
  Matrix X(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) X(r, c) = v(k++);
  }
  return X;
}

Eigen::Index tri_index(Eigen::Index i, Eigen::Index j, Eigen::Index n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

Matrix kron(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  Matrix out = Eigen::kroneckerProduct(a, b).eval();
  return out;
}

Matrix symmetrize(const Eigen::Ref<const Matrix>& X) {
  return 0.5 * (X + X.transpose());
}

bool is_symmetric(const Eigen::Ref<const Matrix>& X, double rel_tol) {
  if (X.rows() != X.cols()) return false;
  const double scale = 1.0 + X.cwiseAbs().maxCoeff();
  return (X - X.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double lambda_min(const Eigen::Ref<const Matrix>& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lambda_max(const Eigen::Ref<const Matrix>& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(S.rows() - 1);
}

double spectral_norm(const Eigen::Ref<const Matrix>& X) {
  if (X.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(X);
  return svd.singularValues()(0);
}

bool is_positive_definite(const Eigen::Ref<const Matrix>& S, double tol) {
  if (!all_finite(S)) return false;
  return lambda_min(S) > tol * (1.0 + spectral_norm(S));
}

bool all_finite(const Eigen::Ref<const Matrix>& X) {
  return X.allFinite();
}

}  // namespace dadp
