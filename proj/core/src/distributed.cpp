#include "dadp/distributed.hpp"

#include <cmath>
#include <vector>

#include "dadp/barrier_sdp.hpp"
#include "dadp/errors.hpp"

namespace dadp {

void SdpConfig::validate(const SparsityStructure& structure) const {
  const int m = structure.r_mask.rows();
  if (!(c > 0.0)) throw ConfigError("sdp: c must be positive");
  if (!(safety >= 1.0)) throw ConfigError("sdp: safety must be >= 1");
  if (!(sdp_tol > 0.0) || max_sdp_iter < 1) throw ConfigError("sdp: bad tolerance or iteration cap");
  if (R_prime.rows() != m || R_prime.cols() != m) throw DimensionMismatch("sdp: R' must be m x m");
  if (!is_symmetric(R_prime)) throw NotSymmetric("sdp: R' must be symmetric");
  if (!is_positive_definite(R_prime, 0.0)) throw ConfigError("sdp: R' must be positive definite");
  if (structure_violation(R_prime, structure.r_mask) != 0.0) {
    throw ConfigError("sdp: R' must be block-diagonal over the agents");
  }
  if (R_assembly.size() != 0) {
    if (R_assembly.rows() != m || R_assembly.cols() != m) {
      throw DimensionMismatch("sdp: assembly weight must be m x m");
    }
    if (!is_positive_definite(symmetrize(R_assembly), 0.0)) {
      throw ConfigError("sdp: assembly weight must be positive definite");
    }
  }
}

StabilizationSystem assemble_stab(const DataMatrices& dm, const Eigen::Ref<const Matrix>& K_s,
                                  const Eigen::Ref<const Matrix>& R) {
  const Matrix Q0 = Matrix::Zero(dm.n, dm.n);
  return {assemble_ls(dm, K_s, Q0, R, 0.0).theta, dm.i_x};
}

SdpResiduals sdp_residuals(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Matrix>& i_x,
                           const Matrix& P_d, const Matrix& D, const Matrix& E,
                           const BlockPattern& p_mask) {
  const Eigen::Index tri = tri_size(P_d.rows());
  Vector w(tri + E.size());
  w << nu(P_d), vec(E);
  const Vector nd = nu(D);
  const Vector r = theta_s * w + i_x * nd;
  SdpResiduals out;
  out.equality_residual_abs = r.norm();
  const double scale = theta_s.norm() * w.norm() + i_x.norm() * nd.norm();
  out.equality_residual = scale > 0.0 ? out.equality_residual_abs / scale : out.equality_residual_abs;
  out.min_eig_D = lambda_min(D);
  out.min_eig_P = lambda_min(P_d);
  out.structure_violation_P = structure_violation(P_d, p_mask);
  return out;
}

namespace {

struct Coordinate {
  Eigen::Index i;
  Eigen::Index j;
};

}  // namespace

SdpSolution solve_structured_sdp(const Eigen::Ref<const Matrix>& theta_s,
                                 const Eigen::Ref<const Matrix>& i_x,
                                 const SparsityStructure& structure, const SdpConfig& cfg) {
  const Eigen::Index n = structure.p_mask.rows();
  const Eigen::Index m = structure.k_mask.rows();
  const Eigen::Index tri = tri_size(n);
  if (structure.k_mask.cols() != n || theta_s.cols() != tri + m * n || i_x.cols() != tri ||
      i_x.rows() != theta_s.rows()) {
    throw DimensionMismatch("solve_structured_sdp: inconsistent system and structure sizes");
  }
  if (!structure.p_mask.is_block_symmetric()) {
    throw ConfigError("solve_structured_sdp: P pattern must be block-symmetric");
  }
  const Eigen::Index Z = theta_s.rows();

  // Free coordinates of P (upper triangle) and of E.
  std::vector<Coordinate> pc;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (structure.p_mask.entry_allowed(i, j)) pc.push_back({i, j});
    }
  }
  std::vector<Eigen::Index> ec;
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = 0; row < m; ++row) {
      if (structure.k_mask.entry_allowed(row, col)) ec.push_back(col * m + row);
    }
  }
  const Eigen::Index d = static_cast<Eigen::Index>(pc.size());
  const Eigen::Index q = static_cast<Eigen::Index>(ec.size());

  // nu(P) = Phi y.
  Matrix T = Matrix::Zero(Z, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto [i, j] = pc[static_cast<std::size_t>(k)];
    T.col(k) = (i == j ? 1.0 : 2.0) * theta_s.col(tri_index(i, j, n));
  }
  Matrix G(Z, q + tri);
  for (Eigen::Index k = 0; k < q; ++k) G.col(k) = theta_s.col(tri + ec[static_cast<std::size_t>(k)]);
  G.rightCols(tri) = i_x;

  if (Z < q + tri) {
    throw RankDeficient("solve_structured_sdp: too few intervals for the (E, D) elimination",
                        static_cast<int>(Z), static_cast<int>(q + tri));
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(G);
  qr.setThreshold(1e-10);
  if (qr.rank() < G.cols()) {
    throw RankDeficient("solve_structured_sdp: (E, D) are not identifiable from the data",
                        static_cast<int>(qr.rank()), static_cast<int>(G.cols()));
  }
  // (e; nu(D)) = L y
  const Matrix L = -qr.solve(T);

  std::vector<Matrix> P_coef(static_cast<std::size_t>(d));
  std::vector<Matrix> D_coef(static_cast<std::size_t>(d));
  Vector g = Vector::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto [i, j] = pc[static_cast<std::size_t>(k)];
    Matrix Pk = Matrix::Zero(n, n);
    Pk(i, j) = 1.0;
    Pk(j, i) = 1.0;
    if (i == j) g(k) = 1.0;
    P_coef[static_cast<std::size_t>(k)] = std::move(Pk);
    D_coef[static_cast<std::size_t>(k)] = symmetrize(nu_inverse(L.col(k).tail(tri), n));
  }
  const Matrix I_n = Matrix::Identity(n, n);
  auto P_of = [&](const Vector& y) {
    Matrix P = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < d; ++k) P += y(k) * P_coef[static_cast<std::size_t>(k)];
    return P;
  };
  auto D_of = [&](const Vector& y) {
    Matrix D = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < d; ++k) D += y(k) * D_coef[static_cast<std::size_t>(k)];
    return D;
  };

  // Phase I: min s s.t. P(y) + sI > 0, D(y) + sI > 0, trace P(y) = n.
  // y = y_ref + N z keeps the trace fixed; the variable is (z, s).
  Vector y_ref = Vector::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    if (g(k) == 1.0) y_ref(k) = 1.0;
  }
  Eigen::JacobiSVD<Matrix> svd(g.transpose(), Eigen::ComputeFullV);
  const Matrix N = svd.matrixV().rightCols(d - 1);
  const Eigen::Index d1 = d;  // (d - 1) components of z plus s

  std::vector<LmiBlock> phase1(2);
  phase1[0].constant = P_of(y_ref);
  phase1[1].constant = D_of(y_ref);
  for (Eigen::Index k = 0; k < d - 1; ++k) {
    phase1[0].coefficients.push_back(P_of(N.col(k)));
    phase1[1].coefficients.push_back(D_of(N.col(k)));
  }
  phase1[0].coefficients.push_back(I_n);
  phase1[1].coefficients.push_back(I_n);

  Vector x0 = Vector::Zero(d1);
  x0(d1 - 1) = std::max(-lambda_min(phase1[0].constant), -lambda_min(phase1[1].constant)) + 1.0;
  Vector g1 = Vector::Zero(d1);
  g1(d1 - 1) = 1.0;

  constexpr double kFeasibleMargin = 1e-9;
  BarrierOptions opt1;
  opt1.gap_tol = 1e-10;
  opt1.max_newton = cfg.max_sdp_iter;
  opt1.early_stop = [&](const Vector& x) { return x(d1 - 1) < -1e-3; };
  const BarrierResult r1 = minimize_barrier(g1, phase1, x0, opt1);
  const double s_star = r1.y(d1 - 1);
  if (!(s_star < -kFeasibleMargin)) {
    throw Infeasible(
        "solve_structured_sdp: no structured certificate exists (phase-I optimum s = " +
        std::to_string(s_star) + ")");
  }
  const Vector y_feas = y_ref + N * r1.y.head(d1 - 1);

  // Phase II: scale the feasible point so both matrices clear 2c, then
  // follow the barrier path for min trace P.
  const double lam = std::min(lambda_min(P_of(y_feas)), lambda_min(D_of(y_feas)));
  if (!(lam > 0.0)) throw NumericalFailure("solve_structured_sdp: phase-I point lost definiteness");
  const Vector y0 = (2.0 * cfg.c / lam) * y_feas;

  std::vector<LmiBlock> phase2(2);
  phase2[0].constant = -cfg.c * I_n;
  phase2[1].constant = -cfg.c * I_n;
  phase2[0].coefficients = P_coef;
  phase2[1].coefficients = D_coef;
  BarrierOptions opt2;
  opt2.gap_tol = cfg.sdp_tol;
  opt2.max_newton = cfg.max_sdp_iter;
  opt2.t_initial = 2.0 * static_cast<double>(n) / std::max(1.0, g.dot(y0));
  const BarrierResult r2 = minimize_barrier(g, phase2, y0, opt2);

  SdpSolution sol;
  sol.P_d = P_of(r2.y);
  sol.D = D_of(r2.y);
  const Vector ed = L * r2.y;
  Vector e_full = Vector::Zero(m * n);
  for (Eigen::Index k = 0; k < q; ++k) e_full(ec[static_cast<std::size_t>(k)]) = ed(k);
  sol.E = vec_inverse(e_full, m, n);
  sol.trace = sol.P_d.trace();
  sol.gap = r2.gap;
  sol.feasibility_margin = -s_star;
  sol.newton_steps = r1.newton_steps + r2.newton_steps;
  sol.residuals = sdp_residuals(theta_s, i_x, sol.P_d, sol.D, sol.E, structure.p_mask);
  return sol;
}

ScaledGain scale_gain(const Eigen::Ref<const Matrix>& K_s, const Eigen::Ref<const Matrix>& R_prime,
                      const Eigen::Ref<const Matrix>& D, const Eigen::Ref<const Matrix>& E,
                      double safety, const BlockPattern& k_mask) {
  if (D.rows() != D.cols() || K_s.cols() != D.rows() || E.rows() != K_s.rows() ||
      E.cols() != K_s.cols() || R_prime.rows() != K_s.rows() || R_prime.cols() != K_s.rows()) {
    throw DimensionMismatch("scale_gain: inconsistent shapes");
  }
  const double dmin = lambda_min(symmetrize(D));
  if (!(dmin > 0.0)) throw NumericalFailure("scale_gain: D is not positive definite");
  const double num = lambda_max(symmetrize(K_s.transpose() * R_prime * K_s));
  ScaledGain out;
  out.s = num > 0.0 ? safety * num / dmin : safety;
  const Matrix raw = out.s * R_prime.ldlt().solve(E);
  out.pre_projection_violation = structure_violation(raw, k_mask);
  out.K_d = project_structure(raw, k_mask);
  return out;
}

DistributedSynthesisResult synthesize_distributed(const DataMatrices& dm,
                                                  const Eigen::Ref<const Matrix>& K_s,
                                                  const SparsityStructure& structure,
                                                  const SdpConfig& cfg) {
  cfg.validate(structure);
  if (structure.p_mask.rows() != dm.n || structure.k_mask.rows() != dm.m) {
    throw DimensionMismatch("synthesize_distributed: structure does not match the data");
  }
  const Matrix R = cfg.R_assembly.size() != 0 ? symmetrize(cfg.R_assembly)
                                              : Matrix(Matrix::Identity(dm.m, dm.m));
  const StabilizationSystem sys = assemble_stab(dm, K_s, R);
  const SdpSolution sol = solve_structured_sdp(sys.theta_s, sys.i_x, structure, cfg);
  const ScaledGain sg = scale_gain(K_s, cfg.R_prime, sol.D, sol.E, cfg.safety, structure.k_mask);

  DistributedSynthesisResult out;
  out.K_s = K_s;
  out.P_d = sol.P_d;
  out.D = sol.D;
  out.E = sol.E;
  out.s = sg.s;
  out.K_d = sg.K_d;
  out.trace = sol.trace;
  out.gap = sol.gap;
  out.residuals = sol.residuals;
  out.structure_violation_K = structure_violation(sg.K_d, structure.k_mask);
  out.pre_projection_violation = sg.pre_projection_violation;
  return out;
}

DistributedSynthesisResult learn_distributed(const DataMatrices& dm, const InteractionGraph& graph,
                                             const BlockPartition& partition, const SdpConfig& cfg,
                                             const LearnerConfig& learner_cfg) {
  if (partition.state_dim() != dm.n || partition.input_dim() != dm.m) {
    throw DimensionMismatch("learn_distributed: partition does not match the data");
  }
  const SparsityStructure structure = SparsityStructure::from_graph(partition, graph);
  LearnerConfig lc = learner_cfg;
  lc.Q = Matrix::Identity(dm.n, dm.n);
  lc.R = Matrix::Identity(dm.m, dm.m);
  LearnResult learned = learn_lqr(dm, lc);
  DistributedSynthesisResult out = synthesize_distributed(dm, learned.K, structure, cfg);
  out.centralized_history = std::move(learned.history);
  return out;
}

}  // namespace dadp
