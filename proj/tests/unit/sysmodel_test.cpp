#include <random>

#include <gtest/gtest.h>

#include "dadp/errors.hpp"
#include "dadp/sysmodel.hpp"
#include "fixtures.hpp"

namespace dadp {
namespace {

MultiAgentSystem fixture_mas() {
  const Matrix A = testing::fixture_A();
  const Matrix B = testing::fixture_B();
  MultiAgentSystem mas{testing::fixture_partition(), testing::fixture_graph(), {}, {}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (mas.graph.connected(i, j)) {
        mas.coupling_blocks[{i, j}] = A.block(2 * i, 2 * j, 2, 2);
      }
    }
    mas.input_blocks.push_back(B.block(2 * i, i, 2, 1));
  }
  return mas;
}

TEST(LtiSystem, ValidatesShapes) {
  EXPECT_THROW(LtiSystem(Matrix::Zero(2, 3), Matrix::Zero(2, 1)), DimensionMismatch);
  EXPECT_THROW(LtiSystem(Matrix::Zero(2, 2), Matrix::Zero(3, 1)), DimensionMismatch);
  const LtiSystem s(Matrix::Zero(2, 2), Matrix::Zero(2, 1));
  EXPECT_EQ(s.state_dim(), 2);
  EXPECT_EQ(s.input_dim(), 1);
}

TEST(InteractionGraph, CanonicalUndirectedEdges) {
  const InteractionGraph g(3, {{2, 1}, {0, 1}});
  EXPECT_TRUE(g.connected(1, 2));
  EXPECT_TRUE(g.connected(2, 1));
  EXPECT_FALSE(g.connected(0, 2));
  EXPECT_TRUE(g.connected(2, 2));
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_THROW(InteractionGraph(2, {{0, 2}}), DimensionMismatch);
}

TEST(Assemble, ReproducesFixtureMatrices) {
  const LtiSystem s = assemble(fixture_mas());
  EXPECT_EQ(s.A(), testing::fixture_A());
  EXPECT_EQ(s.B(), testing::fixture_B());
}

TEST(Assemble, SingleAgent) {
  MultiAgentSystem mas{BlockPartition({1}, {1}), InteractionGraph(1, {}), {}, {}};
  mas.coupling_blocks[{0, 0}] = Matrix::Zero(1, 1);
  mas.input_blocks.push_back(Matrix::Ones(1, 1));
  const LtiSystem s = assemble(mas);
  EXPECT_EQ(s.A(), Matrix::Zero(1, 1));
  EXPECT_EQ(s.B(), Matrix::Ones(1, 1));
}

TEST(Assemble, NoEdgeGivesBlockDiagonal) {
  MultiAgentSystem mas{BlockPartition({1, 2}, {1, 1}), InteractionGraph(2, {}), {}, {}};
  mas.coupling_blocks[{0, 0}] = Matrix::Constant(1, 1, 3.0);
  mas.coupling_blocks[{1, 1}] = Matrix::Constant(2, 2, 4.0);
  mas.input_blocks = {Matrix::Ones(1, 1), Matrix::Ones(2, 1)};
  const LtiSystem s = assemble(mas);
  EXPECT_TRUE(s.A().block(0, 1, 1, 2).isZero(0.0));
  EXPECT_TRUE(s.A().block(1, 0, 2, 1).isZero(0.0));
  EXPECT_TRUE(s.B().block(0, 1, 1, 1).isZero(0.0));
}

TEST(Assemble, RejectsBadBlocks) {
  MultiAgentSystem mas = fixture_mas();
  mas.coupling_blocks[{0, 2}] = Matrix::Ones(2, 2);
  EXPECT_THROW(assemble(mas), ConfigError);
  mas = fixture_mas();
  mas.coupling_blocks[{0, 1}] = Matrix::Ones(3, 2);
  EXPECT_THROW(assemble(mas), DimensionMismatch);
  mas = fixture_mas();
  mas.input_blocks.pop_back();
  EXPECT_THROW(assemble(mas), DimensionMismatch);
}

TEST(Sparsity, FixtureMasks) {
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  EXPECT_FALSE(st.k_mask.allowed(0, 2));
  EXPECT_FALSE(st.k_mask.allowed(2, 0));
  EXPECT_TRUE(st.k_mask.allowed(0, 1));
  EXPECT_FALSE(st.p_mask.allowed(0, 2));
  EXPECT_TRUE(st.p_mask.allowed(1, 2));
  EXPECT_TRUE(st.p_mask.is_block_symmetric());
  EXPECT_TRUE(st.r_mask.allowed(1, 1));
  EXPECT_FALSE(st.r_mask.allowed(0, 1));
  EXPECT_EQ(st.k_mask.rows(), 3);
  EXPECT_EQ(st.k_mask.cols(), 6);
}

TEST(ProjectStructure, FixtureGainByHand) {
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix K(3, 6);
  for (Eigen::Index i = 0; i < K.size(); ++i) K.data()[i] = g(rng);
  Matrix expect = K;
  expect.block(0, 4, 1, 2).setZero();  // agent 1 must not read agent 3
  expect.block(2, 0, 1, 2).setZero();  // agent 3 must not read agent 1
  EXPECT_EQ(project_structure(K, st.k_mask), expect);
  EXPECT_EQ(structure_violation(expect, st.k_mask), 0.0);
}

TEST(ProjectStructure, TrivialMasks) {
  const Matrix M = Matrix::Random(3, 3);
  const BlockPattern full = BlockPattern::full({1, 2}, {2, 1});
  EXPECT_EQ(project_structure(M, full), M);
  const BlockPattern none({1, 2}, {2, 1}, {{false, false}, {false, false}});
  EXPECT_TRUE(project_structure(M, none).isZero(0.0));
  EXPECT_THROW(project_structure(Matrix::Zero(2, 3), full), DimensionMismatch);
}

TEST(StructureViolation, ReportsLargestForbiddenEntry) {
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  Matrix K = Matrix::Ones(3, 6);
  K.block(0, 4, 1, 2).setZero();
  K.block(2, 0, 1, 2).setZero();
  EXPECT_EQ(structure_violation(K, st.k_mask), 0.0);
  K(2, 1) = -2.5;
  EXPECT_EQ(structure_violation(K, st.k_mask), 2.5);
  EXPECT_THROW(structure_violation(Matrix::Zero(6, 3), st.k_mask), DimensionMismatch);
}

// A reference distributed gain for the fixture, two-decimal entries.
TEST(StructureViolation, ReferenceDistributedGainRespectsGraph) {
  Matrix Kd(3, 6);
  Kd << 139.55, 102.25, 73.54, 33.76, 0, 0,
        174.73, -44, 165.15, 142.76, 4.52, 3.97,
        0, 0, 91.70, -5.61, 179.35, 91.79;
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  EXPECT_EQ(structure_violation(Kd, st.k_mask), 0.0);
}

TEST(ProjectStructureProperty, LinearAndIdempotent) {
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int t = 0; t < 50; ++t) {
    Matrix M(6, 6), N(6, 6);
    for (Eigen::Index i = 0; i < M.size(); ++i) {
      M.data()[i] = g(rng);
      N.data()[i] = g(rng);
    }
    const double a = g(rng), b = g(rng);
    const Matrix pm = project_structure(M, st.p_mask);
    EXPECT_EQ(project_structure(pm, st.p_mask), pm);
    const Matrix lhs = project_structure(a * M + b * N, st.p_mask);
    const Matrix rhs = a * pm + b * project_structure(N, st.p_mask);
    EXPECT_TRUE(((lhs - rhs).array() == 0.0 || (lhs - rhs).cwiseAbs().array() < 1e-15).all());
    EXPECT_EQ(structure_violation(lhs, st.p_mask), 0.0);
  }
}

TEST(AssembleProperty, CouplingRespectsGraph) {
  const LtiSystem s = assemble(fixture_mas());
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  EXPECT_EQ(structure_violation(s.A(), st.p_mask), 0.0);
}

}  // namespace
}  // namespace dadp
