#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dadp/linalg.hpp"
#include "dadp/sysmodel.hpp"

namespace dadp {

struct Sinusoid {
  double amplitude = 1.0;
  double frequency = 1.0;  // rad / time
  double phase = 0.0;      // rad
};

/// Input applied while collecting data:
///   u(t) = -behavior_gain x(t) + sum_j a_j sin(w_j t + phi_j)   per channel.
struct ExplorationPolicy {
  Matrix behavior_gain;                       // m x n
  std::vector<std::vector<Sinusoid>> probe;   // one list per input channel
  std::uint64_t seed = 0;

  Eigen::Index input_dim() const { return behavior_gain.rows(); }
  Vector probe_at(double t) const;
  Vector input(double t, const Eigen::Ref<const Vector>& x) const;
};

struct ExcitationOptions {
  double amplitude = 1.0;
  double min_frequency = 0.5;
  double max_frequency = 50.0;
  /// 0 selects ceil((n(n+1)/2 + mn) / m).
  int frequencies_per_channel = 0;
};

int default_frequency_count(Eigen::Index n, Eigen::Index m);

/// Seeded sum-of-sinusoids probe with a zero behavior gain.
ExplorationPolicy make_sinusoid_exploration(Eigen::Index n, Eigen::Index m,
                                            std::uint64_t seed,
                                            const ExcitationOptions& options = {});

/// Samples on a uniform grid t0, t0 + h, t0 + 2h, ...
struct Trajectory {
  double fine_step = 0.0;
  std::vector<double> times;
  Matrix states;  // samples x n
  Matrix inputs;  // samples x m

  std::size_t size() const noexcept { return times.size(); }
  double duration() const;
  Eigen::Index state_dim() const { return states.cols(); }
  Eigen::Index input_dim() const { return inputs.cols(); }
};

struct SimulationOptions {
  /// |x|_inf above this value is reported as divergence.
  double divergence_bound = 1e6;
  double start_time = 0.0;
};

/// Fixed-step classical RK4 integration of x' = A x + B u(t, x) with the
/// input evaluated at the stage times. Throws Divergence with the first
/// offending time.
Trajectory simulate(const LtiSystem& sys, const ExplorationPolicy& policy,
                    const Eigen::Ref<const Vector>& x0, double duration,
                    double fine_step, const SimulationOptions& options = {});

/// Quadrature matrices: the learner's entire view of the plant.
struct DataMatrices {
  Matrix delta_xx;  // Z x n(n+1)/2
  Matrix i_x;       // Z x n(n+1)/2
  Matrix i_xx;      // Z x n^2
  Matrix i_xu;      // Z x mn
  double dt = 0.0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;

  Eigen::Index interval_count() const { return delta_xx.rows(); }
  Eigen::Index unknown_count() const { return tri_size(n) + m * n; }
};

/// Rows k = 0..count-1 cover [t0 + k dt, t0 + (k+1) dt]. delta_xx uses exact
/// endpoint values, the integrals use the composite trapezoid rule on the
/// fine grid.
DataMatrices build_data_matrices(const Trajectory& traj, double dt, Eigen::Index count);

/// Concatenates the rows of several experiments; each contributes
/// floor(duration / dt) intervals.
DataMatrices build_data_matrices(std::span<const Trajectory> experiments, double dt);

/// How exploration data are gathered from the plant.
struct DataPlan {
  double dt = 0.05;
  /// 0 selects 2 (n(n+1)/2 + mn).
  Eigen::Index intervals = 0;
  double fine_step = 1e-3;
  /// Restart from a fresh seeded initial state at every interval instead of
  /// running one long open-loop horizon.
  bool restart_each_interval = true;
  /// Initial states are drawn from N(0, x0_scale^2 I).
  double x0_scale = 1.0;
  /// Initial state of the first (or only) experiment; drawn when absent.
  std::optional<Vector> x0;
  std::uint64_t seed = 0;
};

Eigen::Index default_interval_count(Eigen::Index n, Eigen::Index m);

/// Runs the experiments described by the plan and returns the raw
/// trajectories (one per interval when restarting, otherwise one).
std::vector<Trajectory> collect_trajectories(const LtiSystem& sys,
                                             const ExplorationPolicy& policy,
                                             const DataPlan& plan);

DataMatrices collect_data(const LtiSystem& sys, const ExplorationPolicy& policy,
                          const DataPlan& plan);

struct RankReport {
  bool satisfied = false;
  int numerical_rank = 0;
  int required = 0;
};

/// Excitation test: numerical rank of (I_x, I_xu) must equal
/// n(n+1)/2 + mn. Singular values below rel_tol * sigma_max are dropped.
RankReport check_rank(const DataMatrices& dm, double rel_tol = 1e-8);

}  // namespace dadp
