#pragma once

#include <cstdint>

#include "dadp/simulate.hpp"
#include "dadp/sysmodel.hpp"

namespace dadp::testing {

// Three coupled agents, two states and one input each.
inline Matrix fixture_A() {
  Matrix A(6, 6);
  A << 0.48, 0.23, 0.89, 0.86, 0, 0,
       0.12, 0.07, 0.16, 0.73, 0, 0,
       0.64, 0.03, 0.57, 0.71, 0.65, 0.30,
       0.47, 0.16, 0.62, 0.25, 0.13, 0.67,
       0, 0, 0.40, 0.95, 0.11, 0.63,
       0, 0, 0.14, 0.69, 0.90, 0.08;
  return A;
}

inline Matrix fixture_B() {
  Matrix B(6, 3);
  B << 0.37, 0, 0,
       0.92, 0, 0,
       0, 0.09, 0,
       0, 0.52, 0,
       0, 0, 0.91,
       0, 0, 0.31;
  return B;
}

// Optimal gain for Q = I6, R = I3, rounded to two decimals.
inline Matrix reference_K_star() {
  Matrix K(3, 6);
  K << 3.51, 0.86, 3.82, 2.53, 0.62, 0.23,
       4.36, 0.05, 5.59, 4.34, 1.63, 1.32,
       1.75, -0.01, 3.17, 3.09, 2.45, 2.18;
  return K;
}

inline BlockPartition fixture_partition() { return BlockPartition({2, 2, 2}, {1, 1, 1}); }

// Line graph 1 - 2 - 3 (0-based).
inline InteractionGraph fixture_graph() { return InteractionGraph(3, {{0, 1}, {1, 2}}); }

inline LtiSystem fixture_system() { return LtiSystem(fixture_A(), fixture_B()); }

inline DataMatrices fixture_data(double fine_step, std::uint64_t seed, Eigen::Index intervals = 60) {
  const LtiSystem sys = fixture_system();
  const ExplorationPolicy policy = make_sinusoid_exploration(6, 3, seed);
  DataPlan plan;
  plan.dt = 0.05;
  plan.intervals = intervals;
  plan.fine_step = fine_step;
  plan.seed = seed;
  return collect_data(sys, policy, plan);
}

inline DataMatrices plant_data(const LtiSystem& sys, double fine_step, std::uint64_t seed,
                               Eigen::Index intervals = 0, const ExcitationOptions& excitation = {}) {
  const ExplorationPolicy policy =
      make_sinusoid_exploration(sys.state_dim(), sys.input_dim(), seed, excitation);
  DataPlan plan;
  plan.intervals = intervals;
  plan.fine_step = fine_step;
  plan.seed = seed;
  return collect_data(sys, policy, plan);
}

}  // namespace dadp::testing
