#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "dadp/simulate.hpp"
#include "dadp/sysmodel.hpp"

namespace dadp::app {

/// Plant given either as a compact (A, B) pair or as coupled agents.
using PlantSpec = std::variant<LtiSystem, MultiAgentSystem>;

struct LearnerSpec {
  Matrix Q;
  Matrix R;
  std::optional<double> alpha0;  // empty selects the data-driven search
  std::optional<double> eta;
  std::optional<long> S;
  double sigma = 100.0;
  double epsilon = 1e-6;
  double pd_tol = 1e-9;
  double ls_rcond = 1e-10;
  int max_outer = 1000;
  bool two_phase = false;
};

struct DistributedSpec {
  bool enabled = false;
  double c = 1.0;
  Matrix R_prime;  // empty means identity
  double safety = 1.01;
  double sdp_tol = 1e-8;
  int max_sdp_iter = 500;
};

struct ScenarioConfig {
  std::string name;
  PlantSpec plant;
  ExcitationOptions excitation;
  std::uint64_t seed = 0;
  DataPlan data;
  LearnerSpec learner;
  DistributedSpec distributed;
  std::filesystem::path output_dir = "dadp_out";
  bool verify = false;
  bool write_data = true;
  bool write_trajectories = false;

  LtiSystem system() const;
  /// Partition and graph of the multi-agent form, or a single agent.
  BlockPartition partition() const;
  InteractionGraph graph() const;
};

/// Parses and validates a JSON scenario. Agent indices in the file are
/// 1-based. Throws ConfigError with the offending key.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Only the plant part, for oracle-only checks.
PlantSpec parse_plant_only(const std::string& text);

}  // namespace dadp::app
