#include <random>

#include <gtest/gtest.h>

#include "dadp/barrier_sdp.hpp"
#include "dadp/errors.hpp"

namespace dadp {
namespace {

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

TEST(Barrier, ScalarLowerBound) {
  // min y s.t. y - 1 > 0.
  const LmiBlock b{m1(-1), {m1(1)}};
  BarrierOptions opt;
  const auto r = minimize_barrier(Vector::Ones(1), {b}, Vector::Constant(1, 5.0), opt);
  EXPECT_NEAR(r.y(0), 1.0, 1e-7);
  EXPECT_LE(r.gap, 1e-8 * (1 + std::abs(r.objective)));
  EXPECT_FALSE(r.stopped_early);
}

TEST(Barrier, TwoByTwoBlock) {
  // [[y, 1], [1, y]] > 0 iff y > 1.
  Matrix F1 = Matrix::Identity(2, 2);
  Matrix F0(2, 2);
  F0 << 0, 1, 1, 0;
  const auto r = minimize_barrier(Vector::Ones(1), {LmiBlock{F0, {F1}}}, Vector::Constant(1, 3.0), {});
  EXPECT_NEAR(r.y(0), 1.0, 1e-7);
}

TEST(Barrier, LargestEigenvalue) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    Matrix M(4, 4);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
    M = symmetrize(M);
    // min y s.t. y I - M > 0.
    const LmiBlock b{-M, {Matrix::Identity(4, 4)}};
    const auto r = minimize_barrier(Vector::Ones(1), {b}, Vector::Constant(1, M.norm() + 1), {});
    EXPECT_NEAR(r.y(0), lambda_max(M), 1e-6 * (1 + std::abs(lambda_max(M))));
  }
}

TEST(Barrier, SeveralBlocksAndVariables) {
  // min y1 + y2 s.t. y1 > 2, y2 > -1, y1 + y2 > 3: optimum 3 on a face.
  const LmiBlock a{m1(-2), {m1(1), m1(0)}};
  const LmiBlock b{m1(1), {m1(0), m1(1)}};
  const LmiBlock c{m1(-3), {m1(1), m1(1)}};
  Vector y0(2);
  y0 << 10, 10;
  const auto r = minimize_barrier(Vector::Ones(2), {a, b, c}, y0, {});
  EXPECT_NEAR(r.objective, 3.0, 1e-7);
  EXPECT_GE(r.y(0), 2.0);
  EXPECT_GE(r.y(1), -1.0);
}

TEST(Barrier, EarlyStop) {
  const LmiBlock b{m1(-1), {m1(1)}};
  BarrierOptions opt;
  opt.early_stop = [](const Vector& y) { return y(0) < 2.0; };
  const auto r = minimize_barrier(Vector::Ones(1), {b}, Vector::Constant(1, 5.0), opt);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_LT(r.y(0), 2.0);
  EXPECT_GT(r.y(0), 1.0);
}

TEST(Barrier, InfeasibleStart) {
  const LmiBlock b{m1(-1), {m1(1)}};
  EXPECT_THROW(minimize_barrier(Vector::Ones(1), {b}, Vector::Constant(1, 0.5), {}), NumericalFailure);
}

TEST(Barrier, NewtonCap) {
  const LmiBlock b{m1(-1), {m1(1)}};
  BarrierOptions opt;
  opt.max_newton = 2;
  EXPECT_THROW(minimize_barrier(Vector::Ones(1), {b}, Vector::Constant(1, 1e6), opt), NumericalFailure);
}

TEST(LmiBlock, Evaluates) {
  const LmiBlock b{Matrix::Identity(2, 2), {Matrix::Ones(2, 2), 2 * Matrix::Identity(2, 2)}};
  Vector y(2);
  y << 3, -1;
  Matrix expect(2, 2);
  expect << 2, 3, 3, 2;
  EXPECT_EQ(b.at(y), expect);
}

}  // namespace
}  // namespace dadp
