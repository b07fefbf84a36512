#pragma once

#include "config.hpp"

#include <diracmean/mean.hpp>
#include <diracmean/oracle.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace diracmean::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitDegenerate = 2,
  kExitNotConverged = 3,
  kExitCertificationFailed = 4,
};

inline constexpr const char* kOutDirEnv = "DIRACMEAN_OUT_DIR";

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> budget;
  std::optional<std::size_t> blocks;
  std::optional<std::uint64_t> seed;
};

/// Applies command-line overrides and revalidates.
[[nodiscard]] ExperimentConfig apply_overrides(ExperimentConfig config, const Overrides& overrides);

/// --out / output.dir, then $DIRACMEAN_OUT_DIR, then ./diracmean-out.
[[nodiscard]] std::filesystem::path output_directory(const ExperimentConfig& config);

/// The estimator run described by the config (estimate and compare modes).
[[nodiscard]] ConvergenceReport run_experiment(const ExperimentConfig& config);

/// Quadrature reference for the limit the configured estimator targets.
[[nodiscard]] OracleValue oracle_value(const ExperimentConfig& config);

/// Runs the selected mode, writes the trace/summary files and returns the exit code.
[[nodiscard]] int execute(const ExperimentConfig& config, std::ostream& log);

}  // namespace diracmean::cli
