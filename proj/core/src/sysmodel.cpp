#include "dadp/sysmodel.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dadp/errors.hpp"

namespace dadp {

namespace {

std::vector<int> offsets_of(const std::vector<int>& dims) {
  std::vector<int> out(dims.size(), 0);
  for (std::size_t i = 1; i < dims.size(); ++i) out[i] = out[i - 1] + dims[i - 1];
  return out;
}

std::vector<std::size_t> owners_of(const std::vector<int>& dims) {
  std::vector<std::size_t> owner;
  for (std::size_t b = 0; b < dims.size(); ++b) {
    owner.insert(owner.end(), static_cast<std::size_t>(dims[b]), b);
  }
  return owner;
}

void check_dims(const std::vector<int>& dims, const char* what) {
  for (int d : dims) {
    if (d <= 0) {
      throw DimensionMismatch(std::string(what) + ": block dimensions must be positive");
    }
  }
}

}  // namespace

LtiSystem::LtiSystem(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B)) {
  if (A_.rows() < 1 || A_.rows() != A_.cols()) {
    throw DimensionMismatch("LtiSystem: A must be square and non-empty");
  }
  if (B_.rows() != A_.rows() || B_.cols() < 1) {
    throw DimensionMismatch("LtiSystem: B must have as many rows as A and at least one column");
  }
}

BlockPartition::BlockPartition(std::vector<int> state_dims, std::vector<int> input_dims)
    : state_dims_(std::move(state_dims)), input_dims_(std::move(input_dims)) {
  if (state_dims_.empty() || state_dims_.size() != input_dims_.size()) {
    throw DimensionMismatch("BlockPartition: need N >= 1 agents with matching state/input lists");
  }
  check_dims(state_dims_, "BlockPartition");
  check_dims(input_dims_, "BlockPartition");
  state_offsets_ = offsets_of(state_dims_);
  input_offsets_ = offsets_of(input_dims_);
  n_ = std::accumulate(state_dims_.begin(), state_dims_.end(), 0);
  m_ = std::accumulate(input_dims_.begin(), input_dims_.end(), 0);
}

BlockPartition BlockPartition::single(int n, int m) { return BlockPartition({n}, {m}); }

InteractionGraph::InteractionGraph(std::size_t agent_count, const std::vector<Edge>& edges)
    : agent_count_(agent_count) {
  if (agent_count_ == 0) throw DimensionMismatch("InteractionGraph: no agents");
  for (auto [i, j] : edges) {
    if (i >= agent_count_ || j >= agent_count_) {
      throw DimensionMismatch("InteractionGraph: edge endpoint out of range");
    }
    if (i != j) edges_.emplace(std::min(i, j), std::max(i, j));
  }
}

InteractionGraph InteractionGraph::complete(std::size_t agent_count) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < agent_count; ++i) {
    for (std::size_t j = i + 1; j < agent_count; ++j) edges.emplace_back(i, j);
  }
  return InteractionGraph(agent_count, edges);
}

bool InteractionGraph::connected(std::size_t i, std::size_t j) const {
  if (i == j) return i < agent_count_;
  return edges_.count({std::min(i, j), std::max(i, j)}) > 0;
}

BlockPattern::BlockPattern(std::vector<int> row_dims, std::vector<int> col_dims,
                           std::vector<std::vector<bool>> allowed)
    : row_dims_(std::move(row_dims)),
      col_dims_(std::move(col_dims)),
      allowed_(std::move(allowed)) {
  check_dims(row_dims_, "BlockPattern");
  check_dims(col_dims_, "BlockPattern");
  if (allowed_.size() != row_dims_.size()) {
    throw DimensionMismatch("BlockPattern: pattern row count differs from block rows");
  }
  for (const auto& row : allowed_) {
    if (row.size() != col_dims_.size()) {
      throw DimensionMismatch("BlockPattern: pattern column count differs from block columns");
    }
  }
  row_owner_ = owners_of(row_dims_);
  col_owner_ = owners_of(col_dims_);
  rows_ = static_cast<int>(row_owner_.size());
  cols_ = static_cast<int>(col_owner_.size());
}

BlockPattern BlockPattern::full(std::vector<int> row_dims, std::vector<int> col_dims) {
  std::vector<std::vector<bool>> allowed(row_dims.size(),
                                         std::vector<bool>(col_dims.size(), true));
  return BlockPattern(std::move(row_dims), std::move(col_dims), std::move(allowed));
}

bool BlockPattern::allowed(std::size_t bi, std::size_t bj) const {
  return allowed_.at(bi).at(bj);
}

bool BlockPattern::entry_allowed(Eigen::Index r, Eigen::Index c) const {
  return allowed_[row_owner_.at(static_cast<std::size_t>(r))]
                 [col_owner_.at(static_cast<std::size_t>(c))];
}

bool BlockPattern::is_block_symmetric() const {
  if (row_dims_ != col_dims_) return false;
  for (std::size_t i = 0; i < allowed_.size(); ++i) {
    for (std::size_t j = 0; j < allowed_.size(); ++j) {
      if (allowed_[i][j] != allowed_[j][i]) return false;
    }
  }
  return true;
}

SparsityStructure SparsityStructure::from_graph(const BlockPartition& partition,
                                                const InteractionGraph& graph) {
  const std::size_t N = partition.agent_count();
  if (graph.agent_count() != N) {
    throw DimensionMismatch("SparsityStructure: graph and partition disagree on agent count");
  }
  std::vector<std::vector<bool>> coupled(N, std::vector<bool>(N, false));
  std::vector<std::vector<bool>> diagonal(N, std::vector<bool>(N, false));
  for (std::size_t i = 0; i < N; ++i) {
    diagonal[i][i] = true;
    for (std::size_t j = 0; j < N; ++j) coupled[i][j] = graph.connected(i, j);
  }
  return SparsityStructure{
      BlockPattern(partition.input_dims(), partition.state_dims(), coupled),
      BlockPattern(partition.state_dims(), partition.state_dims(), coupled),
      BlockPattern(partition.input_dims(), partition.input_dims(), diagonal)};
}

LtiSystem assemble(const MultiAgentSystem& mas) {
  const auto& part = mas.partition;
  const std::size_t N = part.agent_count();
  if (mas.graph.agent_count() != N) {
    throw DimensionMismatch("assemble: graph and partition disagree on agent count");
  }
  if (mas.input_blocks.size() != N) {
    throw DimensionMismatch("assemble: need one input block per agent");
  }
  Matrix A = Matrix::Zero(part.state_dim(), part.state_dim());
  Matrix B = Matrix::Zero(part.state_dim(), part.input_dim());
  for (const auto& [key, block] : mas.coupling_blocks) {
    const auto [i, j] = key;
    if (i >= N || j >= N) throw DimensionMismatch("assemble: coupling block index out of range");
    if (!mas.graph.connected(i, j)) {
      throw ConfigError("assemble: coupling block (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ") given for agents without an edge");
    }
    if (block.rows() != part.state_dims()[i] || block.cols() != part.state_dims()[j]) {
      throw DimensionMismatch("assemble: coupling block (" + std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + ") has the wrong shape");
    }
    A.block(part.state_offset(i), part.state_offset(j), block.rows(), block.cols()) = block;
  }
  for (std::size_t i = 0; i < N; ++i) {
    const Matrix& Bi = mas.input_blocks[i];
    if (Bi.rows() != part.state_dims()[i] || Bi.cols() != part.input_dims()[i]) {
      throw DimensionMismatch("assemble: input block " + std::to_string(i + 1) +
                              " has the wrong shape");
    }
    B.block(part.state_offset(i), part.input_offset(i), Bi.rows(), Bi.cols()) = Bi;
  }
  return LtiSystem(std::move(A), std::move(B));
}

Matrix project_structure(const Eigen::Ref<const Matrix>& M, const BlockPattern& mask) {
  if (M.rows() != mask.rows() || M.cols() != mask.cols()) {
    throw DimensionMismatch("project_structure: matrix shape does not match the pattern");
  }
  Matrix out = M;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (!mask.entry_allowed(r, c)) out(r, c) = 0.0;
    }
  }
  return out;
}

double structure_violation(const Eigen::Ref<const Matrix>& M, const BlockPattern& mask) {
  if (M.rows() != mask.rows() || M.cols() != mask.cols()) {
    throw DimensionMismatch("structure_violation: matrix shape does not match the pattern");
  }
  double worst = 0.0;
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      if (!mask.entry_allowed(r, c)) worst = std::max(worst, std::abs(M(r, c)));
    }
  }
  return worst;
}

}  // namespace dadp
