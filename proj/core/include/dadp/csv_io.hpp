#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dadp/adp.hpp"
#include "dadp/distributed.hpp"
#include "dadp/linalg.hpp"
#include "dadp/simulate.hpp"

namespace dadp::csv {

/// Shortest round-trip text is not used: every value is printed with 17
/// significant digits, '.' separator, independent of the global locale.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Header t,x1..xn,u1..um.
void write_trajectory(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory(std::istream& is);

/// First line is a JSON object with n, m, Z and dt; then one
/// `name,row,values...` line per row of delta_xx, i_x, i_xx, i_xu.
void write_data_matrices(std::ostream& os, const DataMatrices& dm);
DataMatrices read_data_matrices(std::istream& is);

using NamedMatrix = std::pair<std::string, Matrix>;

/// `name,row,values...` lines, optionally followed by
/// `summary,key,value,key,value,...`.
void write_matrix_bundle(std::ostream& os, const std::vector<NamedMatrix>& matrices,
                         const std::vector<std::pair<std::string, double>>& summary = {});

struct MatrixBundle {
  std::vector<NamedMatrix> matrices;
  std::vector<std::pair<std::string, double>> summary;

  const Matrix* find(const std::string& name) const;
};

MatrixBundle read_matrix_bundle(std::istream& is);

/// K_d, P_d, D, E and K_s plus s, trace and residuals.
void write_synthesis(std::ostream& os, const DistributedSynthesisResult& result);

/// Columns k,alpha,lambda_max_P,gain_change and, when an oracle gain is
/// given, frobenius_gap_to_oracle. Undefined entries (initial iterate) are
/// left empty.
void write_history(std::ostream& os, const LearnHistory& history,
                   const std::optional<Matrix>& oracle_gain = std::nullopt);

}  // namespace dadp::csv
