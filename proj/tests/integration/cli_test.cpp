#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "app/pipeline.hpp"
#include "dadp/csv_io.hpp"
#include "dadp/sysmodel.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace dadp {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("dadp_cli_" + std::string(info->name()) + "_" +
                                         std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const fs::path& config, const fs::path& out, std::string* err_text = nullptr) {
    std::ostringstream out_s, err_s;
    app::RunOptions opts;
    opts.output_dir = out;
    opts.quiet = true;
    opts.out = &out_s;
    opts.err = &err_s;
    const int code = app::run_scenario(config, opts);
    if (err_text) *err_text = err_s.str();
    return code;
  }

  static fs::path repo_config(const std::string& name) {
    return fs::path(DADP_SOURCE_DIR) / "configs" / name;
  }

  fs::path root_;
};

const char* kScalar = R"({
  "plant": { "A": [[1.0]], "B": [[1.0]] },
  "excitation": { "seed": 3 },
  "data": { "dt": 0.05, "fine_step": 0.001 },
  "learner": { "Q": [[1.0]], "R": [[1.0]], "alpha0": 2.0, "S": 200, "epsilon": 1e-8 },
  "verify": true
})";

TEST_F(Cli, ScalarSmokeRun) {
  const fs::path cfg = write_config("scalar.json", kScalar);
  ASSERT_EQ(run(cfg, root_ / "out"), app::kOk);
  for (const char* f : {"history.csv", "gains.csv", "figure_data.csv", "figure.gp", "manifest.json",
                        "verify.csv", "data_matrices.csv"}) {
    EXPECT_TRUE(fs::exists(root_ / "out" / f)) << f;
  }
  std::ifstream gains(root_ / "out" / "gains.csv");
  const auto bundle = csv::read_matrix_bundle(gains);
  ASSERT_NE(bundle.find("K_star"), nullptr);
  EXPECT_NEAR((*bundle.find("K_star"))(0, 0), 1 + std::sqrt(2.0), 1e-3);

  const auto manifest = nlohmann::json::parse(slurp(root_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("exit_code"), 0);
  EXPECT_EQ(manifest.at("config_sha256"), app::sha256_hex(slurp(cfg)));
  EXPECT_EQ(manifest.at("seed"), 3);
}

TEST_F(Cli, SameSeedSameBytes) {
  const fs::path cfg = write_config("scalar.json", kScalar);
  ASSERT_EQ(run(cfg, root_ / "a"), app::kOk);
  ASSERT_EQ(run(cfg, root_ / "b"), app::kOk);
  for (const char* f : {"history.csv", "gains.csv", "figure_data.csv", "data_matrices.csv", "manifest.json"}) {
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  }
}

TEST_F(Cli, SeedOverrideChangesData) {
  const fs::path cfg = write_config("scalar.json", kScalar);
  ASSERT_EQ(run(cfg, root_ / "a"), app::kOk);
  app::RunOptions opts;
  opts.output_dir = root_ / "b";
  opts.seed = 4;
  opts.quiet = true;
  std::ostringstream sink;
  opts.out = &sink;
  opts.err = &sink;
  ASSERT_EQ(app::run_scenario(cfg, opts), app::kOk);
  EXPECT_NE(slurp(root_ / "a" / "data_matrices.csv"), slurp(root_ / "b" / "data_matrices.csv"));
  EXPECT_EQ(nlohmann::json::parse(slurp(root_ / "b" / "manifest.json")).at("seed"), 4);
}

TEST_F(Cli, ShortDataIsRankFailure) {
  std::string err;
  EXPECT_EQ(run(repo_config("short_data.json"), root_ / "out", &err), app::kRankFailure);
  EXPECT_NE(err.find("rank condition"), std::string::npos) << err;
  const auto manifest = nlohmann::json::parse(slurp(root_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest.at("exit_code"), app::kRankFailure);
}

TEST_F(Cli, MalformedConfigs) {
  EXPECT_EQ(run(write_config("bad.json", "{ not json"), root_ / "o1"), app::kConfigError);
  EXPECT_EQ(run(write_config("noplant.json", R"({"learner": {}})"), root_ / "o2"), app::kConfigError);
  EXPECT_EQ(run(write_config("shape.json", R"({"plant": {"A": [[1, 0]], "B": [[1]]}})"), root_ / "o3"),
            app::kConfigError);
  EXPECT_EQ(run(root_ / "missing.json", root_ / "o4"), app::kConfigError);
}

TEST_F(Cli, ThreeAgentFixture) {
  ASSERT_EQ(run(repo_config("three_agents.json"), root_ / "out"), app::kOk);
  std::ifstream hist(root_ / "out" / "history.csv");
  std::string line;
  std::getline(hist, line);
  EXPECT_EQ(line, "k,alpha,lambda_max_P,gain_change,frobenius_gap_to_oracle");
  std::vector<double> alpha, lam;
  while (std::getline(hist, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    alpha.push_back(csv::parse_double(cells.at(1)));
    if (!cells.at(2).empty()) lam.push_back(csv::parse_double(cells.at(2)));
  }
  ASSERT_FALSE(alpha.empty());
  EXPECT_EQ(alpha.back(), 0.0);
  for (std::size_t i = 1; i < lam.size(); ++i) EXPECT_LE(lam[i], lam[i - 1] * (1 + 1e-12));

  std::ifstream gains(root_ / "out" / "gains.csv");
  const auto g = csv::read_matrix_bundle(gains);
  ASSERT_NE(g.find("K_star"), nullptr);
  ASSERT_NE(g.find("K_d"), nullptr);
  EXPECT_LE((*g.find("K_star") - testing::reference_K_star()).cwiseAbs().maxCoeff(), 0.05);
  const auto st = SparsityStructure::from_graph(testing::fixture_partition(), testing::fixture_graph());
  EXPECT_EQ(structure_violation(*g.find("K_d"), st.k_mask), 0.0);

  std::ifstream verify(root_ / "out" / "verify.csv");
  const auto v = csv::read_matrix_bundle(verify);
  for (const auto& [key, value] : v.summary) {
    if (key == "abscissa_K_d" || key == "abscissa_K_star") EXPECT_LT(value, 0.0) << key;
    if (key == "open_loop_abscissa") EXPECT_GT(value, 0.0);
  }
}

TEST_F(Cli, VerifyHurwitzPlantWithZeroGain) {
  const fs::path cfg = write_config("hurwitz.json", R"({
    "plant": { "A": [[-1.0, 2.0], [0.0, -3.0]], "B": [[0.0], [1.0]] },
    "learner": { "Q": "identity", "R": "identity", "alpha0": 1.0, "S": 10 }
  })");
  fs::create_directories(root_ / "out");
  {
    std::ofstream g(root_ / "out" / "gains.csv");
    csv::write_matrix_bundle(g, {{"K_zero", Matrix::Zero(1, 2)}});
  }
  std::ostringstream out_s, err_s;
  app::RunOptions opts;
  opts.output_dir = root_ / "out";
  opts.out = &out_s;
  opts.err = &err_s;
  ASSERT_EQ(app::verify_scenario(cfg, opts), app::kOk) << err_s.str();
  std::istringstream in(out_s.str());
  const auto v = csv::read_matrix_bundle(in);
  double open = NAN, closed = NAN;
  for (const auto& [key, value] : v.summary) {
    if (key == "open_loop_abscissa") open = value;
    if (key == "abscissa_K_zero") closed = value;
  }
  EXPECT_EQ(open, -1.0);
  EXPECT_EQ(closed, open);
  ASSERT_NE(v.find("K_care"), nullptr);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(app::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(app::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = DADP_BINARY;
  EXPECT_EQ(shell(bin + " --version > /dev/null"), 0);
  EXPECT_EQ(shell(bin + " run " + (root_ / "missing.json").string() + " -q 2> /dev/null"), 1);
  EXPECT_NE(shell(bin + " --no-such-flag > /dev/null 2>&1"), 0);
  const fs::path cfg = write_config("scalar.json", kScalar);
  EXPECT_EQ(shell(bin + " run " + cfg.string() + " -q -o " + (root_ / "cli").string()), 0);
  EXPECT_TRUE(fs::exists(root_ / "cli" / "gains.csv"));
  EXPECT_EQ(shell(bin + " verify " + cfg.string() + " -o " + (root_ / "cli").string() + " > " +
                  (root_ / "verify.csv").string()),
            0);
  EXPECT_NE(slurp(root_ / "verify.csv").find("relative_gap_K_star"), std::string::npos);
  EXPECT_EQ(shell(bin + " run " + repo_config("short_data.json").string() + " -q -o " +
                  (root_ / "short").string() + " 2> /dev/null"),
            2);
}

}  // namespace
}  // namespace dadp
