#include "dadp/adp.hpp"

#include <cmath>
#include <sstream>

#include "dadp/errors.hpp"

namespace dadp {

LearnerConfig LearnerConfig::with_step(Matrix Q, Matrix R, double alpha0, double eta) {
  if (!(eta > 0.0) || !(alpha0 > 0.0)) {
    throw ConfigError("learner: alpha0 and eta must be positive");
  }
  LearnerConfig cfg;
  cfg.Q = std::move(Q);
  cfg.R = std::move(R);
  cfg.S = static_cast<long>(std::ceil(alpha0 / eta - 1e-9));
  cfg.alpha0 = static_cast<double>(cfg.S) * eta;
  return cfg;
}

void LearnerConfig::validate(Eigen::Index n, Eigen::Index m) const {
  if (Q.rows() != n || Q.cols() != n) throw DimensionMismatch("learner: Q must be n x n");
  if (R.rows() != m || R.cols() != m) throw DimensionMismatch("learner: R must be m x m");
  if (!is_symmetric(Q) || !is_symmetric(R)) throw NotSymmetric("learner: Q and R must be symmetric");
  if (lambda_min(Q) < -1e-12 * (1.0 + Q.norm())) throw ConfigError("learner: Q must be PSD");
  if (!is_positive_definite(R, 0.0)) throw ConfigError("learner: R must be positive definite");
  if (!(alpha0 >= 0.0) || S < 1) throw ConfigError("learner: need alpha0 >= 0 and S >= 1");
  if (!(sigma > 0.0) || !(epsilon > 0.0)) throw ConfigError("learner: sigma and epsilon must be positive");
  if (max_outer < 1) throw ConfigError("learner: max_outer must be positive");
}

LeastSquaresSystem assemble_ls(const DataMatrices& dm, const Eigen::Ref<const Matrix>& K,
                               const Eigen::Ref<const Matrix>& Q,
                               const Eigen::Ref<const Matrix>& R, double alpha) {
  const Eigen::Index n = dm.n;
  const Eigen::Index m = dm.m;
  if (K.rows() != m || K.cols() != n || R.rows() != m || R.cols() != m || Q.rows() != n ||
      Q.cols() != n) {
    throw DimensionMismatch("assemble_ls: K, Q, R do not match the data dimensions");
  }
  const Eigen::Index Z = dm.interval_count();
  const Eigen::Index tri = tri_size(n);
  const Matrix I_n = Matrix::Identity(n, n);

  LeastSquaresSystem ls;
  ls.theta.resize(Z, tri + m * n);
  ls.theta.leftCols(tri) = dm.delta_xx - 2.0 * alpha * dm.i_x;
  ls.theta.rightCols(m * n) =
      -2.0 * dm.i_xu * kron(I_n, R) - 2.0 * dm.i_xx * kron(I_n, K.transpose() * R);
  ls.xi = -dm.i_x * nu(symmetrize(Q + K.transpose() * R * K));
  return ls;
}

PolicyUpdate policy_step(const DataMatrices& dm, const Eigen::Ref<const Matrix>& K,
                         const Eigen::Ref<const Matrix>& Q, const Eigen::Ref<const Matrix>& R,
                         double alpha, double ls_rcond) {
  const LeastSquaresSystem ls = assemble_ls(dm, K, Q, R, alpha);
  const Eigen::Index cols = ls.theta.cols();
  const int required = static_cast<int>(cols);
  if (ls.theta.rows() < cols) {
    std::ostringstream msg;
    msg << "policy_step: " << ls.theta.rows() << " intervals cannot determine " << cols
        << " unknowns (rank condition on (I_x, I_xu) violated)";
    throw RankDeficient(msg.str(), static_cast<int>(ls.theta.rows()), required);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(ls.theta);
  qr.setThreshold(ls_rcond);
  if (qr.rank() < cols) {
    std::ostringstream msg;
    msg << "policy_step: least-squares operator has rank " << qr.rank() << " < " << cols
        << " (rank condition on (I_x, I_xu) violated)";
    throw RankDeficient(msg.str(), static_cast<int>(qr.rank()), required);
  }
  const Vector z = qr.solve(ls.xi);
  if (!z.allFinite()) throw NonFiniteSolution("policy_step: non-finite least-squares solution");

  const Eigen::Index n = dm.n;
  const Eigen::Index tri = tri_size(n);
  PolicyUpdate out;
  out.P = symmetrize(nu_inverse(z.head(tri), n));
  out.K_next = vec_inverse(z.tail(dm.m * n), dm.m, n);
  return out;
}

namespace {

bool accept(const Matrix& P, const Eigen::Ref<const Matrix>& P_prev, const LearnerConfig& cfg) {
  return is_positive_definite(P, cfg.pd_tol) && spectral_norm(P - P_prev) < cfg.sigma;
}

}  // namespace

AlphaUpdate decrease_alpha(const DataMatrices& dm, long alpha_steps,
                           const Eigen::Ref<const Matrix>& K, const Eigen::Ref<const Matrix>& P_prev,
                           const LearnerConfig& cfg) {
  if (alpha_steps < 0) throw ConfigError("decrease_alpha: negative damping index");
  long a = alpha_steps;
  Matrix P = P_prev;
  Matrix K_cur = K;
  int accepted = 0;
  while (a >= 1) {
    PolicyUpdate trial = policy_step(dm, K_cur, cfg.Q, cfg.R, cfg.alpha_at(a - 1), cfg.ls_rcond);
    if (!accept(trial.P, P, cfg)) break;
    --a;
    P = std::move(trial.P);
    K_cur = std::move(trial.K_next);
    ++accepted;
  }
  AlphaUpdate out;
  out.alpha_steps = a;
  out.alpha = cfg.alpha_at(a);
  out.steps_taken = accepted;
  if (accepted == 0) {
    PolicyUpdate same = policy_step(dm, K, cfg.Q, cfg.R, out.alpha, cfg.ls_rcond);
    out.P = std::move(same.P);
    out.K_next = std::move(same.K_next);
  } else {
    out.P = std::move(P);
    out.K_next = std::move(K_cur);
  }
  return out;
}

std::string_view to_string(LearnStatus status) {
  switch (status) {
    case LearnStatus::Converged: return "converged";
    case LearnStatus::RankFailure: return "rank_failure";
    case LearnStatus::AlphaStalled: return "alpha_stalled";
    case LearnStatus::IterationCap: return "iteration_cap";
  }
  return "unknown";
}

namespace {

PolicyIterate make_iterate(int k, int stage, IteratePhase phase, long alpha_steps, double alpha,
                           const Matrix& K_prev, Matrix K, Matrix P, int accepted) {
  PolicyIterate it;
  it.k = k;
  it.stage = stage;
  it.phase = phase;
  it.alpha_steps = alpha_steps;
  it.alpha = alpha;
  it.gain_change = (K - K_prev).norm();
  const double base = K_prev.norm();
  it.relative_change = base > 0.0 ? it.gain_change / base : 0.0;
  it.lambda_max_P = lambda_max(P);
  it.K = std::move(K);
  it.P = std::move(P);
  it.accepted_decrements = accepted;
  return it;
}

// Policy iteration at alpha = 0 until the relative gain change drops below
// epsilon. The first iterate always runs. Returns false on the cap.
bool refine(const DataMatrices& dm, const Matrix& Q, const LearnerConfig& cfg, int stage,
            Matrix& K, LearnHistory& history) {
  for (int iter = 0; iter < cfg.max_outer; ++iter) {
    PolicyUpdate step = policy_step(dm, K, Q, cfg.R, 0.0, cfg.ls_rcond);
    const int k = history.iterates.empty() ? 0 : history.iterates.back().k + 1;
    PolicyIterate it = make_iterate(k, stage, IteratePhase::Refinement, 0, 0.0, K,
                                    std::move(step.K_next), std::move(step.P), 0);
    const bool zero_gain = K.norm() == 0.0;
    K = it.K;
    const double change = it.relative_change;
    history.iterates.push_back(std::move(it));
    if (!zero_gain && change < cfg.epsilon) return true;
  }
  return false;
}

// Runs body, turning a rank failure into a terminal status. The history
// keeps every iterate computed before the failure.
template <class Body>
bool guard_rank(LearnResult& result, const Matrix& K, Body&& body) {
  try {
    body();
    return true;
  } catch (const RankDeficient& e) {
    result.history.status = LearnStatus::RankFailure;
    result.history.message = e.what();
    result.history.rank = e.rank();
    result.history.required_rank = e.required();
    result.K = K;
    return false;
  }
}

LearnResult run_stage_one(const DataMatrices& dm, const LearnerConfig& cfg) {
  cfg.validate(dm.n, dm.m);
  LearnResult result;
  LearnHistory& history = result.history;

  Matrix K = Matrix::Zero(dm.m, dm.n);
  Matrix P_prev = Matrix::Zero(dm.n, dm.n);
  long a = cfg.S;

  PolicyIterate initial;
  initial.k = 0;
  initial.alpha_steps = a;
  initial.alpha = cfg.alpha_at(a);
  initial.K = K;
  initial.lambda_max_P = std::nan("");
  initial.gain_change = std::nan("");
  initial.relative_change = std::nan("");
  history.iterates.push_back(initial);

  const bool ok = guard_rank(result, K, [&] {
    int stalled = 0;
    while (a >= 1) {
      AlphaUpdate up = decrease_alpha(dm, a, K, P_prev, cfg);
      const int k = history.iterates.back().k + 1;
      PolicyIterate it = make_iterate(k, 1, IteratePhase::Damping, up.alpha_steps, up.alpha, K,
                                      up.K_next, up.P, up.steps_taken);
      history.iterates.push_back(std::move(it));
      a = up.alpha_steps;
      K = std::move(up.K_next);
      P_prev = std::move(up.P);
      stalled = up.steps_taken == 0 ? stalled + 1 : 0;
      if (stalled >= cfg.max_outer) {
        std::ostringstream msg;
        msg << "damping stalled at alpha = " << cfg.alpha_at(a) << " after " << stalled
            << " calls without an accepted decrement";
        history.status = LearnStatus::AlphaStalled;
        history.message = msg.str();
        return;
      }
    }
    if (!refine(dm, cfg.Q, cfg, 1, K, history)) {
      history.status = LearnStatus::IterationCap;
      history.message = "policy iteration at alpha = 0 hit max_outer";
    }
  });
  if (ok) result.K = K;
  return result;
}

void throw_on_failure(const LearnResult& r) {
  switch (r.history.status) {
    case LearnStatus::Converged: return;
    case LearnStatus::AlphaStalled: throw AlphaStalled(r.history.message);
    case LearnStatus::IterationCap: throw IterationCap(r.history.message);
    case LearnStatus::RankFailure:
      throw RankDeficient(r.history.message, r.history.rank, r.history.required_rank);
  }
}

}  // namespace

LearnResult run_learner(const DataMatrices& dm, const LearnerConfig& cfg) {
  return run_stage_one(dm, cfg);
}

LearnResult learn_lqr(const DataMatrices& dm, const LearnerConfig& cfg) {
  LearnResult r = run_learner(dm, cfg);
  throw_on_failure(r);
  return r;
}

LearnResult run_learner_two_phase(const DataMatrices& dm, const LearnerConfig& cfg) {
  cfg.validate(dm.n, dm.m);
  LearnerConfig surrogate = cfg;
  surrogate.Q = Matrix::Identity(dm.n, dm.n);
  LearnResult r = run_stage_one(dm, surrogate);
  if (!r.converged()) return r;
  Matrix K = r.K;
  const bool ok = guard_rank(r, K, [&] {
    if (!refine(dm, cfg.Q, cfg, 2, K, r.history)) {
      r.history.status = LearnStatus::IterationCap;
      r.history.message = "policy iteration with the true weight hit max_outer";
    }
  });
  if (ok) r.K = K;
  return r;
}

LearnResult learn_lqr_two_phase(const DataMatrices& dm, const LearnerConfig& cfg) {
  LearnResult r = run_learner_two_phase(dm, cfg);
  throw_on_failure(r);
  return r;
}

double find_initial_alpha(const DataMatrices& dm, const LearnerConfig& cfg) {
  cfg.validate(dm.n, dm.m);
  const Matrix K0 = Matrix::Zero(dm.m, dm.n);
  for (int p = 0; p <= 30; ++p) {
    const double alpha = std::ldexp(1.0, p);
    PolicyUpdate step = policy_step(dm, K0, cfg.Q, cfg.R, alpha, cfg.ls_rcond);
    if (is_positive_definite(step.P, cfg.pd_tol) && spectral_norm(step.P) < cfg.sigma) {
      return alpha;
    }
  }
  throw AlphaStalled("find_initial_alpha: no damping up to 2^30 is certified by the data");
}

}  // namespace dadp
