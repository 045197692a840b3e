#pragma once

#include <functional>
#include <vector>

#include "dadp/linalg.hpp"

namespace dadp {

/// Affine symmetric matrix function F(y) = F0 + sum_i y_i F_i.
struct LmiBlock {
  Matrix constant;
  std::vector<Matrix> coefficients;

  Matrix at(const Eigen::Ref<const Vector>& y) const;
};

struct BarrierOptions {
  /// Stop when (sum of block sizes) / t < gap_tol * (1 + |g'y|).
  double gap_tol = 1e-8;
  /// Barrier weight growth per outer iteration (inverse of the mu factor).
  double t_growth = 5.0;
  double t_initial = 1.0;
  /// Centering stops when half the squared Newton decrement drops below this.
  double newton_tol = 1e-10;
  int max_newton = 500;
  /// Checked after every Newton step; returning true ends the solve.
  std::function<bool(const Vector&)> early_stop;
};

struct BarrierResult {
  Vector y;
  double objective = 0.0;
  double gap = 0.0;  // sum of block sizes / t at exit
  int newton_steps = 0;
  int outer_iterations = 0;
  bool stopped_early = false;
};

/// Minimizes g'y subject to F_b(y) > 0 for every block with a primal
/// log-barrier path-following method. y0 must be strictly feasible. Throws
/// NumericalFailure on an infeasible start, a singular Newton system or when
/// max_newton is exceeded.
BarrierResult minimize_barrier(const Eigen::Ref<const Vector>& g, const std::vector<LmiBlock>& blocks,
                               const Eigen::Ref<const Vector>& y0, const BarrierOptions& options);

}  // namespace dadp
