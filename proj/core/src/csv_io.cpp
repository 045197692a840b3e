#include "dadp/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dadp/errors.hpp"

namespace dadp::csv {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ConfigError("csv: cannot parse number '" + text + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() != '#') return true;
  }
  return false;
}

void write_rows(std::ostream& os, const std::string& name, const Matrix& M) {
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    os << name << ',' << r;
    for (Eigen::Index c = 0; c < M.cols(); ++c) os << ',' << format_double(M(r, c));
    os << '\n';
  }
}

// Collects `name,row,values` lines into matrices keyed by name, keeping
// first-seen order.
struct RowCollector {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<double>>> rows;

  void add(const std::vector<std::string>& cells) {
    if (cells.size() < 2) throw ConfigError("csv: malformed matrix row");
    const std::string& name = cells[0];
    auto& list = rows[name];
    if (list.empty()) order.push_back(name);
    const auto index = static_cast<std::size_t>(std::stoul(cells[1]));
    if (index != list.size()) throw ConfigError("csv: rows of '" + name + "' out of order");
    std::vector<double> values;
    for (std::size_t i = 2; i < cells.size(); ++i) values.push_back(parse_double(cells[i]));
    if (!list.empty() && list.front().size() != values.size()) {
      throw ConfigError("csv: ragged rows in '" + name + "'");
    }
    list.push_back(std::move(values));
  }

  Matrix take(const std::string& name) const {
    const auto it = rows.find(name);
    if (it == rows.end()) return Matrix(0, 0);
    const auto& list = it->second;
    Matrix M(static_cast<Eigen::Index>(list.size()),
             static_cast<Eigen::Index>(list.empty() ? 0 : list.front().size()));
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      for (Eigen::Index c = 0; c < M.cols(); ++c) {
        M(r, c) = list[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
    }
    return M;
  }
};

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index n = traj.states.cols();
  const Eigen::Index m = traj.inputs.cols();
  os << 't';
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u" << i;
  os << '\n';
  for (Eigen::Index k = 0; k < traj.states.rows(); ++k) {
    os << format_double(traj.times[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(traj.states(k, i));
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << format_double(traj.inputs(k, i));
    os << '\n';
  }
}

Trajectory read_trajectory(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw ConfigError("csv: empty trajectory file");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") throw ConfigError("csv: trajectory header must start with t");
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].starts_with('x')) {
      if (m != 0) throw ConfigError("csv: state columns must precede input columns");
      ++n;
    } else if (header[i].starts_with('u')) {
      ++m;
    } else {
      throw ConfigError("csv: unknown trajectory column '" + header[i] + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  while (next_line(is, line)) {
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ConfigError("csv: ragged trajectory row");
    std::vector<double> values;
    for (const auto& c : cells) values.push_back(parse_double(c));
    rows.push_back(std::move(values));
  }
  Trajectory traj;
  const auto samples = static_cast<Eigen::Index>(rows.size());
  traj.times.resize(rows.size());
  traj.states.resize(samples, n);
  traj.inputs.resize(samples, m);
  for (Eigen::Index k = 0; k < samples; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    traj.times[static_cast<std::size_t>(k)] = r[0];
    for (Eigen::Index i = 0; i < n; ++i) traj.states(k, i) = r[static_cast<std::size_t>(1 + i)];
    for (Eigen::Index i = 0; i < m; ++i) traj.inputs(k, i) = r[static_cast<std::size_t>(1 + n + i)];
  }
  traj.fine_step = samples > 1 ? traj.times[1] - traj.times[0] : 0.0;
  return traj;
}

void write_data_matrices(std::ostream& os, const DataMatrices& dm) {
  os << "{\"n\":" << dm.n << ",\"m\":" << dm.m << ",\"Z\":" << dm.interval_count()
     << ",\"dt\":" << format_double(dm.dt) << "}\n";
  write_rows(os, "delta_xx", dm.delta_xx);
  write_rows(os, "i_x", dm.i_x);
  write_rows(os, "i_xx", dm.i_xx);
  write_rows(os, "i_xu", dm.i_xu);
}

DataMatrices read_data_matrices(std::istream& is) {
  std::string line;
  if (!next_line(is, line)) throw ConfigError("csv: empty data file");
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("csv: bad data header: ") + e.what());
  }
  DataMatrices dm;
  dm.n = head.at("n").get<Eigen::Index>();
  dm.m = head.at("m").get<Eigen::Index>();
  dm.dt = head.at("dt").get<double>();
  const auto Z = head.at("Z").get<Eigen::Index>();
  RowCollector rc;
  while (next_line(is, line)) rc.add(split(line));
  dm.delta_xx = rc.take("delta_xx");
  dm.i_x = rc.take("i_x");
  dm.i_xx = rc.take("i_xx");
  dm.i_xu = rc.take("i_xu");
  const Eigen::Index tri = tri_size(dm.n);
  if (dm.delta_xx.rows() != Z || dm.i_x.rows() != Z || dm.i_xx.rows() != Z || dm.i_xu.rows() != Z ||
      dm.delta_xx.cols() != tri || dm.i_x.cols() != tri || dm.i_xx.cols() != dm.n * dm.n ||
      dm.i_xu.cols() != dm.n * dm.m) {
    throw DimensionMismatch("csv: data matrices disagree with the header");
  }
  return dm;
}

void write_matrix_bundle(std::ostream& os, const std::vector<NamedMatrix>& matrices,
                         const std::vector<std::pair<std::string, double>>& summary) {
  for (const auto& [name, M] : matrices) write_rows(os, name, M);
  if (!summary.empty()) {
    os << "summary";
    for (const auto& [key, value] : summary) os << ',' << key << ',' << format_double(value);
    os << '\n';
  }
}

const Matrix* MatrixBundle::find(const std::string& name) const {
  for (const auto& [key, M] : matrices) {
    if (key == name) return &M;
  }
  return nullptr;
}

MatrixBundle read_matrix_bundle(std::istream& is) {
  MatrixBundle out;
  RowCollector rc;
  std::string line;
  while (next_line(is, line)) {
    const auto cells = split(line);
    if (!cells.empty() && cells[0] == "summary") {
      if (cells.size() % 2 != 1) throw ConfigError("csv: malformed summary line");
      for (std::size_t i = 1; i + 1 < cells.size(); i += 2) {
        out.summary.emplace_back(cells[i], parse_double(cells[i + 1]));
      }
    } else {
      rc.add(cells);
    }
  }
  for (const auto& name : rc.order) out.matrices.emplace_back(name, rc.take(name));
  return out;
}

void write_synthesis(std::ostream& os, const DistributedSynthesisResult& r) {
  write_matrix_bundle(os, {{"K_d", r.K_d}, {"P_d", r.P_d}, {"D", r.D}, {"E", r.E}, {"K_s", r.K_s}},
                      {{"s", r.s},
                       {"trace", r.trace},
                       {"gap", r.gap},
                       {"equality_residual", r.residuals.equality_residual},
                       {"equality_residual_abs", r.residuals.equality_residual_abs},
                       {"min_eig_D", r.residuals.min_eig_D},
                       {"min_eig_P", r.residuals.min_eig_P},
                       {"structure_violation_P", r.residuals.structure_violation_P},
                       {"structure_violation_K", r.structure_violation_K}});
}

void write_history(std::ostream& os, const LearnHistory& history,
                   const std::optional<Matrix>& oracle_gain) {
  os << "k,alpha,lambda_max_P,gain_change";
  if (oracle_gain) os << ",frobenius_gap_to_oracle";
  os << '\n';
  for (const PolicyIterate& it : history.iterates) {
    os << it.k << ',' << format_double(it.alpha) << ',';
    if (it.P) os << format_double(it.lambda_max_P) << ',' << format_double(it.gain_change);
    else os << ',';
    if (oracle_gain) os << ',' << format_double((it.K - *oracle_gain).norm());
    os << '\n';
  }
}

}  // namespace dadp::csv
