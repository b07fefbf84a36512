// diracmean: run Dirac-mean experiments described by a JSON config.

#include "config.hpp"
#include "execute.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Flags {
  std::string config_path;
  diracmean::cli::Overrides overrides;
};

void add_common_flags(CLI::App& sub, Flags& flags) {
  sub.add_option("--config", flags.config_path, "Experiment config (JSON, comments allowed)")
      ->required()
      ->check(CLI::ExistingFile);
  sub.add_option("--out", flags.overrides.out_dir,
                 std::string("Output directory (default: $") + diracmean::cli::kOutDirEnv +
                     " or ./diracmean-out)");
  sub.add_option("--budget", flags.overrides.budget, "Sample budget N");
  sub.add_option("--blocks", flags.overrides.blocks,
                 "Parallel index blocks per trace segment (1 = sequential)");
  sub.add_option("--seed", flags.overrides.seed, "Seed for pseudorandom sources");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace diracmean::cli;

  CLI::App app{"Dirac-mean estimator for normalized (oscillatory) integrals"};
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"estimate", "Run the estimator and write trace.csv / summary.json"},
      {"certify", "Chi-square certification of a source over a projection hierarchy"},
      {"oracle", "Quadrature reference value for the configured target"},
      {"fresnel-scan", "Regularized Fresnel second moments over a width list"},
      {"compare", "Estimator against the quadrature oracle with a tolerance verdict"},
  };
  for (const auto& [name, help] : commands) add_common_flags(*app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitFailure;
  }

  try {
    std::ifstream in(flags.config_path);
    std::stringstream text;
    text << in.rdbuf();
    auto config = parse_config(text.str());
    config.mode = parse_mode(app.get_subcommands().front()->get_name());
    config = apply_overrides(std::move(config), flags.overrides);
    return execute(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitFailure;
  }
}
