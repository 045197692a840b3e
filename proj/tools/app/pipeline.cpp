#include "pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "dadp/adp.hpp"
#include "dadp/csv_io.hpp"
#include "dadp/distributed.hpp"
#include "dadp/errors.hpp"
#include "dadp/oracle.hpp"
#include "dadp/simulate.hpp"
#include "dadp/version.hpp"
#include "scenario.hpp"

namespace dadp::app {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalFailure("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

namespace {

struct Streams {
  std::ostream& out;
  std::ostream& err;
  bool quiet;

  std::ostream& info() {
    static std::ostream null(nullptr);
    return quiet ? null : out;
  }
};

Streams streams(const RunOptions& o) {
  return {o.out ? *o.out : std::cout, o.err ? *o.err : std::cerr, o.quiet};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_text(path, os.str());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const NotSymmetric*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e)) {
    return kConfigError;
  }
  if (dynamic_cast<const RankDeficient*>(&e)) return kRankFailure;
  if (dynamic_cast<const AlphaStalled*>(&e)) return kAlphaStalled;
  if (dynamic_cast<const Infeasible*>(&e)) return kSdpInfeasible;
  return kOtherFailure;
}

std::string rank_message(int rank, int required) {
  std::ostringstream os;
  os << "excitation rank condition violated: rank(I_x, I_xu) = " << rank << " but n(n+1)/2 + mn = "
     << required << " is required; collect more intervals or richer probing";
  return os.str();
}

LearnerConfig learner_config(const ScenarioConfig& cfg, const DataMatrices& dm) {
  const LearnerSpec& s = cfg.learner;
  LearnerConfig lc;
  lc.Q = s.Q;
  lc.R = s.R;
  lc.sigma = s.sigma;
  lc.epsilon = s.epsilon;
  lc.pd_tol = s.pd_tol;
  lc.ls_rcond = s.ls_rcond;
  lc.max_outer = s.max_outer;
  const double alpha0 = s.alpha0 ? *s.alpha0 : find_initial_alpha(dm, lc);
  if (s.S) {
    lc.alpha0 = alpha0;
    lc.S = *s.S;
  } else {
    const double eta = s.eta ? *s.eta : alpha0 / 1000.0;
    LearnerConfig stepped = LearnerConfig::with_step(lc.Q, lc.R, alpha0, eta);
    lc.alpha0 = stepped.alpha0;
    lc.S = stepped.S;
  }
  return lc;
}

void write_figure(const fs::path& dir, const LearnHistory& h, std::optional<double> lambda_star) {
  write_with(dir / "figure_data.csv", [&](std::ostream& os) {
    os << "k,alpha,lambda_max_P";
    if (lambda_star) os << ",lambda_max_P_star";
    os << '\n';
    for (const PolicyIterate& it : h.iterates) {
      if (!it.P) continue;
      os << it.k << ',' << csv::format_double(it.alpha) << ',' << csv::format_double(it.lambda_max_P);
      if (lambda_star) os << ',' << csv::format_double(*lambda_star);
      os << '\n';
    }
  });
  std::ostringstream gp;
  gp << "# gnuplot -p figure.gp\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set multiplot layout 2,1\n"
        "set ylabel 'alpha_k'\n"
        "plot 'figure_data.csv' using 1:2 with linespoints\n"
        "set xlabel 'k'\n"
        "set ylabel 'lambda_max(P_k)'\n";
  gp << "plot 'figure_data.csv' using 1:3 with linespoints";
  if (lambda_star) gp << ", '' using 1:4 with lines dashtype 2";
  gp << "\nunset multiplot\n";
  write_text(dir / "figure.gp", gp.str());
}

void write_manifest(const fs::path& dir, const fs::path& config, const std::string& digest,
                    std::uint64_t seed, int code, const std::string& message) {
  nlohmann::ordered_json m;
  m["tool"] = "dadp";
  m["version"] = std::string(version);
  m["config"] = config.filename().string();
  m["config_sha256"] = digest;
  m["seed"] = seed;
  m["exit_code"] = code;
  m["message"] = message;
  write_text(dir / "manifest.json", m.dump() + "\n");
}

}  // namespace

int run_scenario(const fs::path& config_path, const RunOptions& options) {
  Streams io = streams(options);
  std::string digest;
  fs::path dir;
  std::uint64_t seed = 0;
  bool manifest_possible = false;
  try {
    const std::string text = read_file(config_path);
    digest = sha256_hex(text);
    ScenarioConfig cfg = parse_scenario(text);
    if (options.seed) cfg.seed = *options.seed;
    if (options.output_dir) cfg.output_dir = *options.output_dir;
    seed = cfg.seed;
    dir = cfg.output_dir;
    fs::create_directories(dir);
    manifest_possible = true;

    const LtiSystem sys = cfg.system();
    const Eigen::Index n = sys.state_dim();
    const Eigen::Index m = sys.input_dim();
    io.info() << "scenario " << cfg.name << ": n = " << n << ", m = " << m << ", seed = " << seed << '\n';

    // Data.
    const ExplorationPolicy policy = make_sinusoid_exploration(n, m, seed, cfg.excitation);
    DataPlan plan = cfg.data;
    plan.seed = seed;
    const std::vector<Trajectory> trajs = collect_trajectories(sys, policy, plan);
    const Eigen::Index Z = plan.intervals > 0 ? plan.intervals : default_interval_count(n, m);
    const DataMatrices dm = plan.restart_each_interval
                                ? build_data_matrices(std::span<const Trajectory>(trajs), plan.dt)
                                : build_data_matrices(trajs.front(), plan.dt, Z);
    if (cfg.write_data) {
      write_with(dir / "data_matrices.csv", [&](std::ostream& os) { csv::write_data_matrices(os, dm); });
    }
    if (cfg.write_trajectories) {
      fs::create_directories(dir / "trajectories");
      for (std::size_t k = 0; k < trajs.size(); ++k) {
        std::ostringstream name;
        name << "episode_" << std::setw(4) << std::setfill('0') << k << ".csv";
        write_with(dir / "trajectories" / name.str(),
                   [&](std::ostream& os) { csv::write_trajectory(os, trajs[k]); });
      }
    }
    const RankReport rank = check_rank(dm);
    io.info() << "data: Z = " << dm.interval_count() << ", rank(I_x, I_xu) = " << rank.numerical_rank
              << " / " << rank.required << '\n';
    if (!rank.satisfied) throw RankDeficient(rank_message(rank.numerical_rank, rank.required),
                                             rank.numerical_rank, rank.required);

    // Learning.
    const LearnerConfig lc = learner_config(cfg, dm);
    io.info() << "learner: alpha0 = " << csv::format_double(lc.alpha0) << ", S = " << lc.S
              << ", eta = " << csv::format_double(lc.eta()) << '\n';
    const LearnResult learned = cfg.learner.two_phase ? run_learner_two_phase(dm, lc) : run_learner(dm, lc);

    std::optional<oracle::CareSolution> care;
    if (cfg.verify) care = oracle::kleinman(sys.A(), sys.B(), lc.Q, lc.R);

    write_with(dir / "history.csv", [&](std::ostream& os) {
      csv::write_history(os, learned.history, care ? std::optional<Matrix>(care->K) : std::nullopt);
    });
    write_figure(dir, learned.history,
                 care ? std::optional<double>(lambda_max(care->P)) : std::nullopt);

    switch (learned.history.status) {
      case LearnStatus::Converged: break;
      case LearnStatus::AlphaStalled: throw AlphaStalled(learned.history.message);
      case LearnStatus::IterationCap: throw IterationCap(learned.history.message);
      case LearnStatus::RankFailure:
        throw RankDeficient(learned.history.message, learned.history.rank,
                            learned.history.required_rank);
    }
    io.info() << "learner converged after " << learned.history.iterates.back().k << " iterates\n";

    std::vector<csv::NamedMatrix> gains{{"K_star", learned.K}};
    std::optional<DistributedSynthesisResult> synth;
    if (cfg.distributed.enabled) {
      SdpConfig sc;
      sc.c = cfg.distributed.c;
      sc.R_prime = cfg.distributed.R_prime.size() ? cfg.distributed.R_prime
                                                  : Matrix(Matrix::Identity(m, m));
      sc.safety = cfg.distributed.safety;
      sc.sdp_tol = cfg.distributed.sdp_tol;
      sc.max_sdp_iter = cfg.distributed.max_sdp_iter;
      const bool identity_weights =
          lc.Q.isIdentity(0.0) && lc.R.isIdentity(0.0) && !cfg.learner.two_phase;
      if (identity_weights) {
        const SparsityStructure st = SparsityStructure::from_graph(cfg.partition(), cfg.graph());
        synth = synthesize_distributed(dm, learned.K, st, sc);
        synth->centralized_history = learned.history;
      } else {
        synth = learn_distributed(dm, cfg.graph(), cfg.partition(), sc, lc);
      }
      gains.emplace_back("K_d", synth->K_d);
      write_with(dir / "synthesis.csv", [&](std::ostream& os) { csv::write_synthesis(os, *synth); });
      io.info() << "synthesis: s = " << csv::format_double(synth->s)
                << ", trace(P_d) = " << csv::format_double(synth->trace)
                << ", equality residual = " << csv::format_double(synth->residuals.equality_residual)
                << '\n';
    }
    write_with(dir / "gains.csv", [&](std::ostream& os) { csv::write_matrix_bundle(os, gains); });

    if (care) {
      std::vector<std::pair<std::string, double>> summary{
          {"riccati_residual", care->residual},
          {"open_loop_abscissa", oracle::spectral_abscissa(sys.A())},
          {"gap_K_star", (learned.K - care->K).norm()},
          {"relative_gap_K_star", (learned.K - care->K).norm() / std::max(1e-300, care->K.norm())},
          {"abscissa_K_star", oracle::spectral_abscissa(sys.A() - sys.B() * learned.K)},
          {"abscissa_K_care", oracle::spectral_abscissa(sys.A() - sys.B() * care->K)}};
      if (synth) {
        summary.emplace_back("abscissa_K_d", oracle::spectral_abscissa(sys.A() - sys.B() * synth->K_d));
        summary.emplace_back("abscissa_K_s", oracle::spectral_abscissa(sys.A() - sys.B() * synth->K_s));
      }
      write_with(dir / "verify.csv", [&](std::ostream& os) {
        csv::write_matrix_bundle(os, {{"K_care", care->K}, {"P_care", care->P}}, summary);
      });
      io.info() << "verify: relative gap to CARE gain = "
                << csv::format_double(summary[3].second) << '\n';
    }
    write_manifest(dir, config_path, digest, seed, kOk, "ok");
    return kOk;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    io.err << "dadp: " << e.what() << '\n';
    if (manifest_possible) {
      try {
        write_manifest(dir, config_path, digest, seed, code, e.what());
      } catch (const std::exception&) {
      }
    }
    return code;
  }
}

int verify_scenario(const fs::path& config_path, const RunOptions& options) {
  Streams io = streams(options);
  try {
    ScenarioConfig cfg = parse_scenario(read_file(config_path));
    if (options.output_dir) cfg.output_dir = *options.output_dir;
    const LtiSystem sys = cfg.system();
    const oracle::CareSolution care = oracle::kleinman(sys.A(), sys.B(), cfg.learner.Q, cfg.learner.R);
    std::vector<std::pair<std::string, double>> summary{
        {"open_loop_abscissa", oracle::spectral_abscissa(sys.A())},
        {"riccati_residual", care.residual},
        {"abscissa_K_care", oracle::spectral_abscissa(sys.A() - sys.B() * care.K)}};
    const fs::path gains = cfg.output_dir / "gains.csv";
    if (fs::exists(gains)) {
      std::ifstream in(gains);
      const csv::MatrixBundle bundle = csv::read_matrix_bundle(in);
      for (const auto& [name, K] : bundle.matrices) {
        if (K.rows() != sys.input_dim() || K.cols() != sys.state_dim()) {
          throw DimensionMismatch("verify: gain '" + name + "' in gains.csv has the wrong shape");
        }
        summary.emplace_back("abscissa_" + name, oracle::spectral_abscissa(sys.A() - sys.B() * K));
        summary.emplace_back("relative_gap_" + name,
                             (K - care.K).norm() / std::max(1e-300, care.K.norm()));
      }
    }
    csv::write_matrix_bundle(io.out, {{"K_care", care.K}, {"P_care", care.P}}, summary);
    return kOk;
  } catch (const std::exception& e) {
    io.err << "dadp: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace dadp::app
