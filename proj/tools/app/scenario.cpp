#include "scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dadp/errors.hpp"

namespace dadp::app {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw ConfigError("config: '" + key + "' " + why);
}

Matrix read_matrix(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key, "must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix M;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) fail(key, "rows must be arrays");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      fail(key, "has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) fail(key, "entries must be numbers");
      M(r, c) = v.get<double>();
    }
  }
  return M;
}

// "identity", a scalar multiple of I, or an explicit matrix.
Matrix read_weight(const json& parent, const std::string& key, Eigen::Index dim) {
  if (!parent.contains(key)) return Matrix::Identity(dim, dim);
  const json& j = parent.at(key);
  if (j.is_string()) {
    if (j.get<std::string>() != "identity") fail(key, "string form must be \"identity\"");
    return Matrix::Identity(dim, dim);
  }
  if (j.is_number()) return j.get<double>() * Matrix::Identity(dim, dim);
  Matrix M = read_matrix(j, key);
  if (M.rows() != dim || M.cols() != dim) fail(key, "has the wrong size");
  return M;
}

double positive(const json& parent, const std::string& key, double fallback) {
  if (!parent.contains(key)) return fallback;
  if (!parent.at(key).is_number()) fail(key, "must be a number");
  const double v = parent.at(key).get<double>();
  if (!(v > 0.0)) fail(key, "must be positive");
  return v;
}

template <typename T>
T integer(const json& parent, const std::string& key, T fallback, T min_value) {
  if (!parent.contains(key)) return fallback;
  if (!parent.at(key).is_number_integer()) fail(key, "must be an integer");
  const auto v = parent.at(key).get<long long>();
  if (v < static_cast<long long>(min_value)) fail(key, "is out of range");
  return static_cast<T>(v);
}

bool flag(const json& parent, const std::string& key, bool fallback) {
  if (!parent.contains(key)) return fallback;
  if (!parent.at(key).is_boolean()) fail(key, "must be true or false");
  return parent.at(key).get<bool>();
}

const json& object(const json& parent, const std::string& key) {
  static const json empty = json::object();
  if (!parent.contains(key)) return empty;
  if (!parent.at(key).is_object()) fail(key, "must be an object");
  return parent.at(key);
}

std::vector<int> int_list(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key, "must be a non-empty array");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<int>() < 1) fail(key, "entries must be positive integers");
    out.push_back(v.get<int>());
  }
  return out;
}

std::size_t agent_index(const json& v, std::size_t count, const std::string& key) {
  if (!v.is_number_integer()) fail(key, "agent indices must be integers");
  const auto i = v.get<long long>();
  if (i < 1 || static_cast<std::size_t>(i) > count) fail(key, "agent index out of range (1-based)");
  return static_cast<std::size_t>(i - 1);
}

MultiAgentSystem read_multi_agent(const json& j) {
  if (!j.contains("state_dims") || !j.contains("input_dims")) {
    fail("plant.multi_agent", "needs state_dims and input_dims");
  }
  BlockPartition partition(int_list(j.at("state_dims"), "state_dims"),
                           int_list(j.at("input_dims"), "input_dims"));
  const std::size_t N = partition.agent_count();
  std::vector<InteractionGraph::Edge> edges;
  if (j.contains("edges")) {
    if (!j.at("edges").is_array()) fail("edges", "must be an array of pairs");
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) fail("edges", "must hold pairs");
      edges.emplace_back(agent_index(e[0], N, "edges"), agent_index(e[1], N, "edges"));
    }
  }
  MultiAgentSystem mas{partition, InteractionGraph(N, edges), {}, {}};
  if (!j.contains("blocks") || !j.at("blocks").is_array()) fail("blocks", "must be an array");
  for (const auto& b : j.at("blocks")) {
    if (!b.is_object() || !b.contains("row") || !b.contains("col") || !b.contains("A")) {
      fail("blocks", "entries need row, col and A");
    }
    const std::size_t r = agent_index(b.at("row"), N, "blocks.row");
    const std::size_t c = agent_index(b.at("col"), N, "blocks.col");
    if (!mas.coupling_blocks.emplace(std::make_pair(r, c), read_matrix(b.at("A"), "blocks.A")).second) {
      fail("blocks", "repeats a (row, col) pair");
    }
  }
  if (!j.contains("input_blocks") || !j.at("input_blocks").is_array() ||
      j.at("input_blocks").size() != N) {
    fail("input_blocks", "must list one matrix per agent");
  }
  for (const auto& b : j.at("input_blocks")) mas.input_blocks.push_back(read_matrix(b, "input_blocks"));
  assemble(mas);  // validates shapes and the graph
  return mas;
}

PlantSpec read_plant(const json& root) {
  if (!root.contains("plant") || !root.at("plant").is_object()) fail("plant", "is missing");
  const json& p = root.at("plant");
  const bool compact = p.contains("A") || p.contains("B");
  const bool agents = p.contains("multi_agent");
  if (compact == agents) fail("plant", "must give exactly one of {A, B} or multi_agent");
  if (agents) return read_multi_agent(p.at("multi_agent"));
  if (!p.contains("A") || !p.contains("B")) fail("plant", "needs both A and B");
  return LtiSystem(read_matrix(p.at("A"), "plant.A"), read_matrix(p.at("B"), "plant.B"));
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
}

}  // namespace

LtiSystem ScenarioConfig::system() const {
  if (const auto* lti = std::get_if<LtiSystem>(&plant)) return *lti;
  return assemble(std::get<MultiAgentSystem>(plant));
}

BlockPartition ScenarioConfig::partition() const {
  if (const auto* mas = std::get_if<MultiAgentSystem>(&plant)) return mas->partition;
  const LtiSystem& s = std::get<LtiSystem>(plant);
  return BlockPartition::single(static_cast<int>(s.state_dim()), static_cast<int>(s.input_dim()));
}

InteractionGraph ScenarioConfig::graph() const {
  if (const auto* mas = std::get_if<MultiAgentSystem>(&plant)) return mas->graph;
  return InteractionGraph::complete(1);
}

PlantSpec parse_plant_only(const std::string& text) {
  try {
    return read_plant(parse_json(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ScenarioConfig parse_scenario(const std::string& text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  try {
    ScenarioConfig cfg{.name = root.value("name", std::string("scenario")),
                       .plant = read_plant(root),
                       .excitation = {},
                       .seed = 0,
                       .data = {},
                       .learner = {},
                       .distributed = {}};
    const LtiSystem sys = cfg.system();
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index m = sys.input_dim();

    const json& ex = object(root, "excitation");
    cfg.seed = integer<std::uint64_t>(ex, "seed", 0, 0);
    cfg.excitation.amplitude = positive(ex, "amplitude", cfg.excitation.amplitude);
    cfg.excitation.min_frequency = positive(ex, "min_frequency", cfg.excitation.min_frequency);
    cfg.excitation.max_frequency = positive(ex, "max_frequency", cfg.excitation.max_frequency);
    cfg.excitation.frequencies_per_channel = integer<int>(ex, "frequencies_per_channel", 0, 0);
    if (cfg.excitation.min_frequency > cfg.excitation.max_frequency) {
      fail("excitation", "needs min_frequency <= max_frequency");
    }

    const json& d = object(root, "data");
    cfg.data.dt = positive(d, "dt", cfg.data.dt);
    cfg.data.intervals = integer<Eigen::Index>(d, "intervals", 0, 1);
    cfg.data.fine_step = positive(d, "fine_step", cfg.data.fine_step);
    cfg.data.restart_each_interval = flag(d, "restart_each_interval", true);
    cfg.data.x0_scale = positive(d, "x0_scale", cfg.data.x0_scale);
    if (d.contains("x0")) {
      const json& x0 = d.at("x0");
      if (!x0.is_array() || static_cast<Eigen::Index>(x0.size()) != n) fail("data.x0", "must have n entries");
      Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = x0[static_cast<std::size_t>(i)].get<double>();
      cfg.data.x0 = v;
    }

    const json& l = object(root, "learner");
    cfg.learner.Q = read_weight(l, "Q", n);
    cfg.learner.R = read_weight(l, "R", m);
    if (l.contains("alpha0")) {
      const json& a = l.at("alpha0");
      if (a.is_string()) {
        if (a.get<std::string>() != "auto") fail("learner.alpha0", "string form must be \"auto\"");
      } else {
        cfg.learner.alpha0 = positive(l, "alpha0", 1.0);
      }
    }
    if (l.contains("eta") && l.contains("S")) fail("learner", "give eta or S, not both");
    if (l.contains("eta")) cfg.learner.eta = positive(l, "eta", 1.0);
    if (l.contains("S")) cfg.learner.S = integer<long>(l, "S", 1, 1);
    cfg.learner.sigma = positive(l, "sigma", cfg.learner.sigma);
    cfg.learner.epsilon = positive(l, "epsilon", cfg.learner.epsilon);
    cfg.learner.pd_tol = positive(l, "pd_tol", cfg.learner.pd_tol);
    cfg.learner.ls_rcond = positive(l, "ls_rcond", cfg.learner.ls_rcond);
    cfg.learner.max_outer = integer<int>(l, "max_outer", cfg.learner.max_outer, 1);
    cfg.learner.two_phase = flag(l, "two_phase", false);

    const json& ds = object(root, "distributed");
    cfg.distributed.enabled = flag(ds, "enabled", false);
    cfg.distributed.c = positive(ds, "c", cfg.distributed.c);
    if (ds.contains("R_prime")) cfg.distributed.R_prime = read_weight(ds, "R_prime", m);
    cfg.distributed.safety = positive(ds, "safety", cfg.distributed.safety);
    if (cfg.distributed.safety < 1.0) fail("distributed.safety", "must be >= 1");
    cfg.distributed.sdp_tol = positive(ds, "sdp_tol", cfg.distributed.sdp_tol);
    cfg.distributed.max_sdp_iter = integer<int>(ds, "max_sdp_iter", cfg.distributed.max_sdp_iter, 1);

    const json& out = object(root, "output");
    if (out.contains("directory")) cfg.output_dir = out.at("directory").get<std::string>();
    cfg.write_data = flag(out, "data_matrices", true);
    cfg.write_trajectories = flag(out, "trajectories", false);
    cfg.verify = flag(root, "verify", false);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace dadp::app
