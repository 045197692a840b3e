#pragma once

#include "dadp/adp.hpp"
#include "dadp/linalg.hpp"
#include "dadp/simulate.hpp"
#include "dadp/sysmodel.hpp"

namespace dadp {

struct SdpConfig {
  double c = 1.0;          // eigenvalue floor for P_d and D
  Matrix R_prime;          // m x m, PD, block-diagonal per r_mask
  Matrix R_assembly;       // weight inside Theta_s; empty means identity
  double safety = 1.01;
  double sdp_tol = 1e-8;
  int max_sdp_iter = 500;  // Newton steps per barrier phase

  void validate(const SparsityStructure& structure) const;
};

/// Theta_s = Theta(K_s) at alpha = 0, the constraint matrix of
/// Theta_s (nu(P_d); vec(E)) = -I_x nu(D).
struct StabilizationSystem {
  Matrix theta_s;
  Matrix i_x;
};

StabilizationSystem assemble_stab(const DataMatrices& dm, const Eigen::Ref<const Matrix>& K_s,
                                  const Eigen::Ref<const Matrix>& R);

struct SdpResiduals {
  /// ||r|| / (||Theta_s||_F ||(nu(P_d); vec E)|| + ||I_x||_F ||nu(D)||) with
  /// r = Theta_s (nu(P_d); vec E) + I_x nu(D).
  double equality_residual = 0.0;
  double equality_residual_abs = 0.0;
  double min_eig_D = 0.0;
  double min_eig_P = 0.0;
  double structure_violation_P = 0.0;
};

struct SdpSolution {
  Matrix P_d;
  Matrix D;
  Matrix E;
  double trace = 0.0;
  double gap = 0.0;               // certified bound on trace - optimum
  double feasibility_margin = 0.0;  // from the phase-I problem
  int newton_steps = 0;
  SdpResiduals residuals;
};

/// min trace(P_d) s.t. Theta_s (nu(P_d); vec E) = -I_x nu(D), D >= cI,
/// P_d >= cI, P_d in the p_mask pattern, E in the k_mask pattern.
/// Forbidden entries are removed from the variable vector and the equality
/// is solved for (E, D) in least squares, so P_d is the only free variable.
/// Throws Infeasible, NumericalFailure or RankDeficient.
SdpSolution solve_structured_sdp(const Eigen::Ref<const Matrix>& theta_s,
                                 const Eigen::Ref<const Matrix>& i_x,
                                 const SparsityStructure& structure, const SdpConfig& cfg);

SdpResiduals sdp_residuals(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Matrix>& i_x,
                           const Matrix& P_d, const Matrix& D, const Matrix& E,
                           const BlockPattern& p_mask);

struct ScaledGain {
  double s = 0.0;
  Matrix K_d;
  double pre_projection_violation = 0.0;
};

/// s = safety * lambda_max(K_s' R' K_s) / lambda_min(D), floored at safety;
/// K_d = s R'^-1 E projected onto k_mask.
ScaledGain scale_gain(const Eigen::Ref<const Matrix>& K_s, const Eigen::Ref<const Matrix>& R_prime,
                      const Eigen::Ref<const Matrix>& D, const Eigen::Ref<const Matrix>& E,
                      double safety, const BlockPattern& k_mask);

struct DistributedSynthesisResult {
  Matrix K_s;
  Matrix P_d;
  Matrix D;
  Matrix E;
  double s = 0.0;
  Matrix K_d;
  double trace = 0.0;
  double gap = 0.0;
  SdpResiduals residuals;
  double structure_violation_K = 0.0;
  double pre_projection_violation = 0.0;
  LearnHistory centralized_history;
};

/// Structured synthesis from a given stabilizing K_s (steps after learning).
DistributedSynthesisResult synthesize_distributed(const DataMatrices& dm,
                                                  const Eigen::Ref<const Matrix>& K_s,
                                                  const SparsityStructure& structure,
                                                  const SdpConfig& cfg);

/// Learns K_s with Q = I, R = I, then synthesizes K_d in the graph pattern.
DistributedSynthesisResult learn_distributed(const DataMatrices& dm, const InteractionGraph& graph,
                                             const BlockPartition& partition, const SdpConfig& cfg,
                                             const LearnerConfig& learner_cfg);

}  // namespace dadp
