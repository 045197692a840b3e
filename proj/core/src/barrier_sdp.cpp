#include "dadp/barrier_sdp.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "dadp/errors.hpp"

namespace dadp {

Matrix LmiBlock::at(const Eigen::Ref<const Vector>& y) const {
  Matrix F = constant;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    F.noalias() += y(static_cast<Eigen::Index>(i)) * coefficients[i];
  }
  return F;
}

namespace {

// -sum_b logdet F_b(y); empty when some block is not positive definite.
std::optional<double> barrier_value(const std::vector<LmiBlock>& blocks,
                                    const Eigen::Ref<const Vector>& y) {
  double value = 0.0;
  for (const LmiBlock& b : blocks) {
    Eigen::LLT<Matrix> llt(b.at(y));
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vector diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) return std::nullopt;
    value -= 2.0 * diag.array().log().sum();
  }
  return value;
}

// Gradient and Hessian of -sum_b logdet F_b(y).
void barrier_derivatives(const std::vector<LmiBlock>& blocks, const Eigen::Ref<const Vector>& y,
                         Vector& grad, Matrix& hess) {
  const Eigen::Index d = y.size();
  grad.setZero(d);
  hess.setZero(d, d);
  for (const LmiBlock& b : blocks) {
    Eigen::LLT<Matrix> llt(b.at(y));
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("barrier: iterate left the feasible region");
    }
    const Matrix L = llt.matrixL();
    const Eigen::Index k = L.rows();
    // Rows of W hold L^-1 F_i L^-T flattened, so tr(F^-1 F_i) and
    // tr(F^-1 F_i F^-1 F_j) become traces and inner products.
    Matrix W(d, k * k);
    for (Eigen::Index i = 0; i < d; ++i) {
      const Matrix half = L.triangularView<Eigen::Lower>().solve(b.coefficients[static_cast<std::size_t>(i)]);
      const Matrix Wi = L.triangularView<Eigen::Lower>().solve(half.transpose());
      W.row(i) = Eigen::Map<const Vector>(Wi.data(), k * k).transpose();
      grad(i) -= Wi.trace();
    }
    hess.noalias() += W * W.transpose();
  }
}

}  // namespace

BarrierResult minimize_barrier(const Eigen::Ref<const Vector>& g, const std::vector<LmiBlock>& blocks,
                               const Eigen::Ref<const Vector>& y0, const BarrierOptions& options) {
  const Eigen::Index d = g.size();
  if (y0.size() != d) throw DimensionMismatch("barrier: start point size differs from objective");
  double total_dim = 0.0;
  for (const LmiBlock& b : blocks) {
    if (static_cast<Eigen::Index>(b.coefficients.size()) != d) {
      throw DimensionMismatch("barrier: block coefficient count differs from variable count");
    }
    total_dim += static_cast<double>(b.constant.rows());
  }
  if (!barrier_value(blocks, y0)) throw NumericalFailure("barrier: start point is not strictly feasible");

  BarrierResult res;
  res.y = y0;
  double t = options.t_initial;
  Vector grad;
  Matrix hess;
  for (;;) {
    ++res.outer_iterations;
    // Centering by damped Newton.
    for (;;) {
      barrier_derivatives(blocks, res.y, grad, hess);
      grad += t * g;
      Eigen::LDLT<Matrix> ldlt(hess);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw NumericalFailure("barrier: Newton system is not positive definite");
      }
      const Vector dir = -ldlt.solve(grad);
      if (!dir.allFinite()) throw NumericalFailure("barrier: non-finite Newton direction");
      const double slope = grad.dot(dir);
      if (-slope / 2.0 <= options.newton_tol) break;

      const double f0 = t * g.dot(res.y) + *barrier_value(blocks, res.y);
      double step = 1.0;
      bool moved = false;
      while (step > 1e-10) {
        const Vector trial = res.y + step * dir;
        if (auto bv = barrier_value(blocks, trial)) {
          const double f1 = t * g.dot(trial) + *bv;
          if (f1 < f0 && f1 <= f0 + 0.25 * step * slope) {
            res.y = trial;
            moved = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (++res.newton_steps > options.max_newton) {
        throw NumericalFailure("barrier: Newton iteration cap exceeded");
      }
      if (options.early_stop && options.early_stop(res.y)) {
        res.stopped_early = true;
        res.objective = g.dot(res.y);
        res.gap = total_dim / t;
        return res;
      }
      if (!moved) break;  // no further progress in floating point
    }
    res.objective = g.dot(res.y);
    res.gap = total_dim / t;
    if (res.gap < options.gap_tol * (1.0 + std::abs(res.objective))) return res;
    t *= options.t_growth;
  }
}

}  // namespace dadp
