#pragma once

#include <optional>
#include <vector>

#include "dadp/linalg.hpp"

// Model-based ground truth. Used by tests and the CLI's verification path;
// the learner never calls into this namespace.
namespace dadp::oracle {

/// max Re(lambda) over the eigenvalues of A.
double spectral_abscissa(const Eigen::Ref<const Matrix>& A);
bool is_hurwitz(const Eigen::Ref<const Matrix>& A);

/// Unique symmetric P with A_cl' P + P A_cl + M = 0. Dense Kronecker solve,
/// so intended for n up to a few dozen. Throws NotHurwitz when A_cl is not
/// Hurwitz.
Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& A_cl,
                      const Eigen::Ref<const Matrix>& M);

/// Frobenius norm of (A - alpha I)'P + P(A - alpha I) + Q - P B R^-1 B' P.
double riccati_residual(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                        const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                        double alpha, const Eigen::Ref<const Matrix>& P);

struct CareSolution {
  Matrix P;
  Matrix K;
  int iterations = 0;
  double residual = 0.0;
  /// Value matrices of every policy evaluation, when requested.
  std::vector<Matrix> P_history;
};

struct KleinmanOptions {
  double alpha = 0.0;
  /// Must stabilize A - alpha I - B K0. When absent a stabilizing gain is
  /// found by damping continuation from K = 0.
  std::optional<Matrix> K0;
  double tol = 1e-12;
  int max_iter = 200;
  bool record_history = false;
};

/// Kleinman policy iteration for the damped CARE
///   (A - alpha I)'P + P(A - alpha I) + Q - P B R^-1 B' P = 0.
CareSolution kleinman(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                      const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                      const KleinmanOptions& options = {});

}  // namespace dadp::oracle
