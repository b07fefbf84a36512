#pragma once

// Experiment description for the diracmean CLI.
//
// The document is JSON (comments allowed). Every section is optional and
// falls back to the defaults below; unknown keys are rejected so that typos
// surface as validation errors naming the field.

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diracmean::cli {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation };

  ConfigError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error((kind == Kind::Parse ? "ParseError: " : "ValidationError: ") +
                           (field.empty() ? message : field + ": " + message)),
        kind_(kind),
        field_(std::move(field)) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

enum class Mode { Estimate, Certify, Oracle, FresnelScan, Compare };

struct SourceSpec {
  std::string kind = "halton";  // halton | weyl | pseudorandom | convergent | constant
  std::uint64_t index_offset = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> generators;  // weyl; empty selects frac(pi^k)
  std::size_t rank = 16;                // weyl rank when generators is empty
  std::vector<double> target{0.0};      // convergent
  double rate = 0.5;
  std::vector<double> displacement{1.0};
  double value = 0.3;                 // constant
  std::string pullback = "identity";  // identity | normal | uniform
  std::vector<double> widths{1.0};    // normal
  std::vector<double> lower{0.0};     // uniform
  std::vector<double> upper{1.0};

  bool operator==(const SourceSpec&) const = default;
};

/// Built-in functions: coordinate, coordinate-product, polynomial, cosine,
/// gaussian, quadratic-form, constant.
struct FunctionSpec {
  std::string name = "coordinate";
  std::size_t rank = 1;  // coordinate-product
  std::size_t index = 0;
  std::vector<double> coefficients;
  std::vector<std::vector<double>> matrix;
  std::vector<double> vector;
  double constant = 0.0;
  std::vector<double> widths;
  double frequency = 1.0;
  double value = 0.0;
  double value_im = 0.0;

  bool operator==(const FunctionSpec&) const = default;
};

struct ActionSpec {
  std::string kind = "quadratic";  // quadratic | alternating
  std::vector<std::vector<double>> matrix{{1.0}};
  std::vector<double> vector;
  double constant = 0.0;

  bool operator==(const ActionSpec&) const = default;
};

struct PolicySpec {
  std::string kind = "constant";  // constant | density | boltzmann | oscillatory | fresnel
  std::optional<FunctionSpec> density;
  ActionSpec action;
  std::vector<double> regularizer_widths{1.0};  // gaussian regularizer (fresnel)
  std::string route = "pullback";               // pullback | weight-borne

  bool operator==(const PolicySpec&) const = default;
};

struct StoppingSpec {
  std::size_t window = 8;
  double rel_tol = 1e-4;
  std::uint64_t min_samples = 1000;
  double degeneracy_threshold = 1e-8;

  bool operator==(const StoppingSpec&) const = default;
};

struct OutputSpec {
  std::string dir;  // empty: --out, then $DIRACMEAN_OUT_DIR, then ./diracmean-out
  std::string trace = "trace.csv";
  std::string summary = "summary.json";

  bool operator==(const OutputSpec&) const = default;
};

struct ScanSpec {
  std::vector<double> sigmas{1.0, 2.0, 4.0};
  double curvature = 1.0;

  bool operator==(const ScanSpec&) const = default;
};

struct ExperimentConfig {
  Mode mode = Mode::Estimate;
  SourceSpec source;
  PolicySpec policy;
  FunctionSpec function;
  std::vector<std::size_t> hierarchy{1, 2, 3};
  std::vector<std::size_t> bins_per_axis;
  std::uint64_t budget = 100'000;
  StoppingSpec stopping;
  std::uint64_t trace_stride = 1000;
  double significance = 0.999;
  std::size_t blocks = 1;
  std::size_t oracle_cells = 4;
  double tolerance = 1e-3;
  ScanSpec scan;
  OutputSpec output;

  bool operator==(const ExperimentConfig&) const = default;
};

[[nodiscard]] std::string_view to_string(Mode mode);
[[nodiscard]] Mode parse_mode(std::string_view name);

/// Parses and validates a document; throws ConfigError.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

/// Cross-field checks; throws ConfigError(Validation).
void validate(const ExperimentConfig& config);

}  // namespace diracmean::cli
