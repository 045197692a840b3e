#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dadp/linalg.hpp"
#include "dadp/simulate.hpp"

namespace dadp {

/// Settings of the model-free learner. The damping parameter is kept on the
/// grid alpha = k * eta, eta = alpha0 / S, so it reaches 0 exactly.
struct LearnerConfig {
  Matrix Q;            // n x n, symmetric, PSD
  Matrix R;            // m x m, symmetric, PD
  double alpha0 = 1.0;
  long S = 100;
  double sigma = 100.0;
  double epsilon = 1e-6;
  double pd_tol = 1e-9;
  double ls_rcond = 1e-10;
  int max_outer = 1000;

  double eta() const { return alpha0 / static_cast<double>(S); }
  double alpha_at(long steps) const { return static_cast<double>(steps) * eta(); }

  /// Picks S = ceil(alpha0 / eta) so that the grid step is exactly eta and
  /// alpha0 is rounded up onto the grid.
  static LearnerConfig with_step(Matrix Q, Matrix R, double alpha0, double eta);

  void validate(Eigen::Index n, Eigen::Index m) const;
};

/// Theta z = Xi, z = (nu(P); vec(K_next)).
struct LeastSquaresSystem {
  Matrix theta;  // Z x [n(n+1)/2 + mn]
  Vector xi;     // Z
};

/// Theta = (delta_xx - 2 alpha I_x, -2 I_xu (I_n (x) R) - 2 I_xx (I_n (x) K'R)),
/// Xi = -I_x nu(Q + K'RK).
LeastSquaresSystem assemble_ls(const DataMatrices& dm, const Eigen::Ref<const Matrix>& K,
                               const Eigen::Ref<const Matrix>& Q,
                               const Eigen::Ref<const Matrix>& R, double alpha);

struct PolicyUpdate {
  Matrix P;       // value matrix of the evaluated gain (symmetrized)
  Matrix K_next;  // improved gain
};

/// One off-policy evaluation/improvement step from data. Throws
/// RankDeficient when Theta loses column rank (relative pivot threshold
/// ls_rcond) and NonFiniteSolution on NaN/Inf output.
PolicyUpdate policy_step(const DataMatrices& dm, const Eigen::Ref<const Matrix>& K,
                         const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                         double alpha, double ls_rcond = 1e-10);

struct AlphaUpdate {
  long alpha_steps = 0;  // alpha = alpha_steps * eta
  double alpha = 0.0;
  Matrix P;
  Matrix K_next;
  int steps_taken = 0;   // accepted decrements
};

/// Greedy damping decrease. Starting from alpha_steps, repeatedly tries
/// alpha - eta and keeps the result while P is positive definite and
/// ||P - P_prev||_2 < sigma; the comparison is always against the most
/// recently accepted P. With no accepted decrement the step is recomputed
/// at the current alpha.
AlphaUpdate decrease_alpha(const DataMatrices& dm, long alpha_steps,
                           const Eigen::Ref<const Matrix>& K, const Eigen::Ref<const Matrix>& P_prev,
                           const LearnerConfig& cfg);

enum class IteratePhase { Initial, Damping, Refinement };

struct PolicyIterate {
  int k = 0;
  int stage = 1;  // 2 for the true-weight stage of the two-phase learner
  IteratePhase phase = IteratePhase::Initial;
  long alpha_steps = 0;
  double alpha = 0.0;
  Matrix K;                  // gain after this iterate
  std::optional<Matrix> P;   // absent for the initial iterate
  double lambda_max_P = 0.0;
  double gain_change = 0.0;  // ||K - K_prev||_F
  double relative_change = 0.0;
  int accepted_decrements = 0;
};

enum class LearnStatus { Converged, RankFailure, AlphaStalled, IterationCap };

std::string_view to_string(LearnStatus status);

struct LearnHistory {
  std::vector<PolicyIterate> iterates;
  LearnStatus status = LearnStatus::Converged;
  std::string message;
  /// Numerical and required rank of the failing system on RankFailure.
  int rank = 0;
  int required_rank = 0;
};

struct LearnResult {
  Matrix K;
  LearnHistory history;

  bool converged() const { return history.status == LearnStatus::Converged; }
};

/// Runs the alternating damping/policy-iteration learner from K = 0 and
/// reports how it terminated instead of throwing on algorithmic failure.
LearnResult run_learner(const DataMatrices& dm, const LearnerConfig& cfg);

/// run_learner() that throws RankDeficient, AlphaStalled or IterationCap
/// when the learner does not converge.
LearnResult learn_lqr(const DataMatrices& dm, const LearnerConfig& cfg);

/// For singular Q: learn a stabilizing gain with Q' = I, then policy-iterate
/// at alpha = 0 with the true Q.
LearnResult run_learner_two_phase(const DataMatrices& dm, const LearnerConfig& cfg);
LearnResult learn_lqr_two_phase(const DataMatrices& dm, const LearnerConfig& cfg);

/// Smallest alpha in {1, 2, 4, ..., 2^30} for which the data certify that
/// A - alpha I is Hurwitz (policy_step with K = 0 yields P > 0, ||P|| < sigma).
double find_initial_alpha(const DataMatrices& dm, const LearnerConfig& cfg);

}  // namespace dadp
