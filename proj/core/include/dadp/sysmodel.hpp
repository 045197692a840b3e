#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "dadp/linalg.hpp"

namespace dadp {

/// Continuous-time plant x' = A x + B u. This is ground truth: only the
/// simulator and the model-based oracle ever look inside.
class LtiSystem {
 public:
  LtiSystem(Matrix A, Matrix B);

  const Matrix& A() const noexcept { return A_; }
  const Matrix& B() const noexcept { return B_; }
  Eigen::Index state_dim() const noexcept { return A_.rows(); }
  Eigen::Index input_dim() const noexcept { return B_.cols(); }

 private:
  Matrix A_;
  Matrix B_;
};

/// Per-agent state and input dimensions.
class BlockPartition {
 public:
  BlockPartition(std::vector<int> state_dims, std::vector<int> input_dims);

  /// One agent owning every state and input.
  static BlockPartition single(int n, int m);

  std::size_t agent_count() const noexcept { return state_dims_.size(); }
  const std::vector<int>& state_dims() const noexcept { return state_dims_; }
  const std::vector<int>& input_dims() const noexcept { return input_dims_; }
  int state_dim() const noexcept { return n_; }
  int input_dim() const noexcept { return m_; }
  int state_offset(std::size_t agent) const { return state_offsets_.at(agent); }
  int input_offset(std::size_t agent) const { return input_offsets_.at(agent); }

 private:
  std::vector<int> state_dims_;
  std::vector<int> input_dims_;
  std::vector<int> state_offsets_;
  std::vector<int> input_offsets_;
  int n_ = 0;
  int m_ = 0;
};

/// Undirected interaction graph on agents 0..N-1. Edges are stored as
/// (min, max) pairs; self-pairs are implicit and always connected.
class InteractionGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  InteractionGraph(std::size_t agent_count, const std::vector<Edge>& edges);

  static InteractionGraph complete(std::size_t agent_count);

  std::size_t agent_count() const noexcept { return agent_count_; }
  const std::set<Edge>& edges() const noexcept { return edges_; }
  bool connected(std::size_t i, std::size_t j) const;

 private:
  std::size_t agent_count_;
  std::set<Edge> edges_;
};

/// Boolean pattern over the blocks of a partitioned matrix. Block (i, j)
/// spans row_dims[i] rows and col_dims[j] columns.
class BlockPattern {
 public:
  BlockPattern(std::vector<int> row_dims, std::vector<int> col_dims,
               std::vector<std::vector<bool>> allowed);

  static BlockPattern full(std::vector<int> row_dims, std::vector<int> col_dims);

  const std::vector<int>& row_dims() const noexcept { return row_dims_; }
  const std::vector<int>& col_dims() const noexcept { return col_dims_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t block_rows() const noexcept { return row_dims_.size(); }
  std::size_t block_cols() const noexcept { return col_dims_.size(); }
  bool allowed(std::size_t bi, std::size_t bj) const;

  /// Entry-level view of the pattern.
  bool entry_allowed(Eigen::Index r, Eigen::Index c) const;
  bool is_block_symmetric() const;

 private:
  std::vector<int> row_dims_;
  std::vector<int> col_dims_;
  std::vector<std::vector<bool>> allowed_;
  std::vector<std::size_t> row_owner_;
  std::vector<std::size_t> col_owner_;
  int rows_ = 0;
  int cols_ = 0;
};

/// Allowed patterns for gains (m x n), Lyapunov certificates (n x n) and
/// input weights (m x m) induced by a partition and an interaction graph.
struct SparsityStructure {
  BlockPattern k_mask;
  BlockPattern p_mask;
  BlockPattern r_mask;

  static SparsityStructure from_graph(const BlockPartition& partition,
                                      const InteractionGraph& graph);
};

/// Heterogeneous coupled agents: x_i' = A_ii x_i + sum_j A_ij x_j + B_i u_i.
struct MultiAgentSystem {
  BlockPartition partition;
  InteractionGraph graph;
  /// Keyed by ordered (i, j); only pairs with i == j or {i,j} in the graph
  /// may appear. Missing coupling blocks are zero.
  std::map<std::pair<std::size_t, std::size_t>, Matrix> coupling_blocks;
  std::vector<Matrix> input_blocks;
};

/// Builds the compact (A, B) of a multi-agent system. Throws
/// DimensionMismatch on inconsistent blocks and ConfigError when a coupling
/// block is supplied for a pair outside the graph.
LtiSystem assemble(const MultiAgentSystem& mas);

/// Zeroes every block the pattern forbids.
Matrix project_structure(const Eigen::Ref<const Matrix>& M,
                         const BlockPattern& mask);

/// Largest absolute entry inside a forbidden block (0 iff M respects the
/// pattern).
double structure_violation(const Eigen::Ref<const Matrix>& M,
                           const BlockPattern& mask);

}  // namespace dadp
