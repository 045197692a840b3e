#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "app/pipeline.hpp"
#include "dadp/version.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Model-free LQR and distributed stabilization from trajectory data"};
  cli.set_version_flag("--version", std::string(dadp::version));
  cli.require_subcommand(1);

  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output,-o", output, "Output directory (overrides the config)");
    sub->add_flag("--quiet,-q", quiet, "Only report errors");
  };
  CLI::App* run = cli.add_subcommand("run", "Generate data, learn, synthesize and write results");
  add_common(run);
  run->add_option("--seed", seed, "Excitation seed (overrides the config)");
  CLI::App* verify = cli.add_subcommand("verify", "Model-based report for the configured plant");
  add_common(verify);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : dadp::app::kConfigError;
  }

  dadp::app::RunOptions opts;
  if (!output.empty()) opts.output_dir = output;
  if (run->parsed() && run->count("--seed") > 0) opts.seed = seed;
  opts.quiet = quiet;
  if (run->parsed()) return dadp::app::run_scenario(config, opts);
  return dadp::app::verify_scenario(config, opts);
}
