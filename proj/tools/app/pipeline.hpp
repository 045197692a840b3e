#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace dadp::app {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kRankFailure = 2,
  kAlphaStalled = 3,
  kSdpInfeasible = 4,
  kOtherFailure = 5,
};

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::ostream* out = nullptr;  // defaults to std::cout
  std::ostream* err = nullptr;  // defaults to std::cerr
};

/// Data generation, learning, optional synthesis and oracle checks.
/// Writes history.csv, gains.csv, figure_data.csv, figure.gp and
/// manifest.json (plus verify.csv, synthesis.csv, data_matrices.csv when
/// enabled) into the output directory.
int run_scenario(const std::filesystem::path& config_path, const RunOptions& options);

/// Model-based report for the configured plant; reads gains.csv from the
/// output directory when present.
int verify_scenario(const std::filesystem::path& config_path, const RunOptions& options);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace dadp::app
