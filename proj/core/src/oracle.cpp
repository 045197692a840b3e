#include "dadp/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "dadp/errors.hpp"

namespace dadp::oracle {

double spectral_abscissa(const Eigen::Ref<const Matrix>& A) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw DimensionMismatch("spectral_abscissa: matrix must be square and non-empty");
  }
  if (!A.allFinite()) throw NumericalFailure("spectral_abscissa: non-finite matrix");
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) {
    throw NumericalFailure("spectral_abscissa: eigenvalue iteration did not converge");
  }
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Eigen::Ref<const Matrix>& A) { return spectral_abscissa(A) < 0.0; }

Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& A_cl, const Eigen::Ref<const Matrix>& M) {
  const Eigen::Index n = A_cl.rows();
  if (A_cl.cols() != n || M.rows() != n || M.cols() != n) {
    throw DimensionMismatch("solve_lyapunov: A_cl and M must be square of equal size");
  }
  if (!is_symmetric(M)) throw NotSymmetric("solve_lyapunov: M is not symmetric");
  const double abscissa = spectral_abscissa(A_cl);
  if (!(abscissa < 0.0)) {
    std::ostringstream msg;
    msg << "solve_lyapunov: A_cl is not Hurwitz (spectral abscissa " << abscissa << ")";
    throw NotHurwitz(msg.str());
  }
  const Matrix I = Matrix::Identity(n, n);
  const Matrix At = A_cl.transpose();
  const Matrix L = kron(I, At) + kron(At, I);
  const Vector rhs = -vec(M);
  const Vector p = L.partialPivLu().solve(rhs);
  Matrix P = symmetrize(vec_inverse(p, n, n));
  if (!P.allFinite()) throw NonFiniteSolution("solve_lyapunov: non-finite solution");
  return P;
}

double riccati_residual(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                        const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                        double alpha, const Eigen::Ref<const Matrix>& P) {
  const Eigen::Index n = A.rows();
  const Matrix Aa = A - alpha * Matrix::Identity(n, n);
  const Matrix BtP = B.transpose() * P;
  const Matrix res = Aa.transpose() * P + P * Aa + Q - BtP.transpose() * R.llt().solve(BtP);
  return res.norm();
}

namespace {

struct Iterated {
  Matrix P;
  Matrix K;
  int iterations = 0;
  std::vector<Matrix> P_history;
};

Iterated iterate(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                 double alpha, Matrix K, double tol, int max_iter, bool record) {
  const Eigen::Index n = A.rows();
  const Matrix Aa = A - alpha * Matrix::Identity(n, n);
  const Eigen::LLT<Matrix> R_chol(R);
  Iterated out;
  for (int k = 0; k < max_iter; ++k) {
    const Matrix A_cl = Aa - B * K;
    Matrix P = solve_lyapunov(A_cl, symmetrize(Q + K.transpose() * R * K));
    Matrix K_next = R_chol.solve(B.transpose() * P);
    if (record) out.P_history.push_back(P);
    const double change = (K_next - K).norm() / std::max(1.0, K.norm());
    out.P = std::move(P);
    out.iterations = k + 1;
    K = std::move(K_next);
    if (change < tol) {
      out.K = std::move(K);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "kleinman: no convergence after " << max_iter << " iterations";
  throw IterationCap(msg.str());
}

// Damping continuation: K = 0 stabilizes A - (alpha + beta) I for large beta;
// walk beta down to 0 keeping the current optimal gain stabilizing.
Matrix bootstrap_gain(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                      double alpha, int max_iter) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  double beta = std::max(0.0, spectral_abscissa(A - alpha * I) + 1.0);
  Matrix K = Matrix::Zero(B.cols(), n);
  if (beta == 0.0) return K;
  // Regularized weight keeps every damped problem well posed even if Q is
  // singular.
  const Matrix Qb = Q + Matrix::Identity(n, n) * (1e-6 * (1.0 + Q.norm()));
  for (int step = 0; step < 10 * max_iter; ++step) {
    K = iterate(A, B, Qb, R, alpha + beta, K, 1e-10, max_iter, false).K;
    if (beta == 0.0) return K;
    const double margin = -spectral_abscissa(A - (alpha + beta) * I - B * K);
    if (!(margin > 0.0)) throw NumericalFailure("kleinman: damping continuation lost stability");
    beta = std::max(0.0, beta - 0.5 * margin);
    if (beta < 1e-12) beta = 0.0;
  }
  throw IterationCap("kleinman: damping continuation did not reach alpha");
}

}  // namespace

CareSolution kleinman(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                      const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                      const KleinmanOptions& options) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw DimensionMismatch("kleinman: inconsistent A, B, Q, R shapes");
  }
  if (!is_symmetric(Q) || !is_symmetric(R)) throw NotSymmetric("kleinman: Q and R must be symmetric");
  if (!is_positive_definite(R, 0.0)) throw ConfigError("kleinman: R must be positive definite");

  const Matrix Ad = A;
  const Matrix Bd = B;
  const Matrix Qd = Q;
  const Matrix Rd = R;
  Matrix K0;
  if (options.K0) {
    K0 = *options.K0;
    if (K0.rows() != m || K0.cols() != n) throw DimensionMismatch("kleinman: K0 has the wrong shape");
    if (!is_hurwitz(Ad - options.alpha * Matrix::Identity(n, n) - Bd * K0)) {
      throw NotHurwitz("kleinman: K0 does not stabilize A - alpha I");
    }
  } else {
    K0 = bootstrap_gain(Ad, Bd, Qd, Rd, options.alpha, options.max_iter);
  }

  Iterated it = iterate(Ad, Bd, Qd, Rd, options.alpha, K0, options.tol, options.max_iter,
                        options.record_history);
  CareSolution sol;
  sol.P = std::move(it.P);
  sol.K = std::move(it.K);
  sol.iterations = it.iterations;
  sol.residual = riccati_residual(Ad, Bd, Qd, Rd, options.alpha, sol.P);
  sol.P_history = std::move(it.P_history);
  return sol;
}

}  // namespace dadp::oracle
