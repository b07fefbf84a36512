#include "registry.hpp"

#include <diracmean/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace diracmean::cli {

namespace {

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& row : rows) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

}  // namespace

std::size_t function_rank(const FunctionSpec& spec) {
  if (spec.name == "coordinate" || spec.name == "polynomial" || spec.name == "cosine") {
    return spec.index + 1;
  }
  if (spec.name == "coordinate-product") return spec.rank;
  if (spec.name == "gaussian") return spec.widths.size();
  if (spec.name == "quadratic-form") return spec.matrix.size();
  return 0;
}

std::size_t action_rank(const ActionSpec& spec) {
  return spec.kind == "quadratic" ? spec.matrix.size() : 0;
}

CylinderFunction make_function(const FunctionSpec& spec) {
  const std::size_t rank = function_rank(spec);
  const std::size_t k = spec.index;
  if (spec.name == "coordinate") {
    return cylinder_function(
        rank, [k](std::span<const double> x) { return Complex(x[k], 0.0); },
        "x" + std::to_string(k + 1));
  }
  if (spec.name == "coordinate-product") {
    return cylinder_function(
        rank,
        [](std::span<const double> x) {
          double p = 1.0;
          for (double v : x) p *= v;
          return Complex(p, 0.0);
        },
        "coordinate-product");
  }
  if (spec.name == "polynomial") {
    return cylinder_function(
        rank,
        [k, c = spec.coefficients](std::span<const double> x) {
          double acc = 0.0;
          for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x[k] + *it;
          return Complex(acc, 0.0);
        },
        "polynomial");
  }
  if (spec.name == "cosine") {
    return cylinder_function(
        rank,
        [k, w = spec.frequency](std::span<const double> x) { return Complex(std::cos(w * x[k]), 0.0); },
        "cosine");
  }
  if (spec.name == "gaussian") {
    return cylinder_function(
        rank,
        [w = spec.widths](std::span<const double> x) {
          double e = 0.0;
          for (std::size_t i = 0; i < w.size(); ++i) e += x[i] * x[i] / (w[i] * w[i]);
          return Complex(std::exp(-0.5 * e), 0.0);
        },
        "gaussian");
  }
  if (spec.name == "quadratic-form") {
    QuadraticForm form{rank, flatten(spec.matrix),
                       spec.vector.empty() ? std::vector<double>(rank, 0.0) : spec.vector,
                       spec.constant};
    return cylinder_function(
        rank, [form](std::span<const double> x) { return Complex(form(x), 0.0); },
        "quadratic-form");
  }
  if (spec.name == "constant") return constant_function(Complex(spec.value, spec.value_im));
  throw Error(ErrorCode::InvalidArgument, "unknown function '" + spec.name + "'");
}

ActionFunctional make_action(const ActionSpec& spec) {
  if (spec.kind == "alternating") return alternating_phase_action();
  return quadratic_action(spec.matrix.size(), flatten(spec.matrix), spec.vector, spec.constant);
}

PointSource make_base_source(const SourceSpec& spec) {
  if (spec.kind == "halton") return halton_source(spec.index_offset);
  if (spec.kind == "weyl") {
    return spec.generators.empty() ? weyl_pi_source(spec.rank, spec.index_offset)
                                   : weyl_source(spec.generators, spec.index_offset);
  }
  if (spec.kind == "pseudorandom") return pseudorandom_source(spec.seed);
  if (spec.kind == "convergent") return convergent_source(spec.target, spec.rate, spec.displacement);
  if (spec.kind == "constant") return constant_source(spec.value);
  throw Error(ErrorCode::InvalidArgument, "unknown source '" + spec.kind + "'");
}

QuantileFamily make_pullback(const SourceSpec& spec) {
  if (spec.pullback == "normal") return normal_family(spec.widths);
  if (spec.pullback == "uniform") return uniform_family(spec.lower, spec.upper);
  return identity_family();
}

PointSource make_source(const SourceSpec& spec) {
  auto base = make_base_source(spec);
  if (spec.pullback == "identity") return base;
  return pullback_source(base, make_pullback(spec));
}

Regularizer make_regularizer(const PolicySpec& spec) {
  return gaussian_regularizer(spec.regularizer_widths);
}

FresnelRoute make_route(const PolicySpec& spec) {
  return spec.route == "weight-borne" ? FresnelRoute::WeightBorne : FresnelRoute::Pullback;
}

WeightPolicy make_policy(const PolicySpec& spec) {
  if (spec.kind == "constant") return constant_policy();
  if (spec.kind == "density") {
    const auto phi = make_function(*spec.density);
    return density_policy([phi](std::span<const double> x) { return phi(x).real(); }, phi.rank());
  }
  if (spec.kind == "boltzmann") return boltzmann_policy(make_action(spec.action));
  if (spec.kind == "oscillatory") return oscillatory_policy(make_action(spec.action));
  throw Error(ErrorCode::InvalidArgument, "policy '" + spec.kind + "' is not a plain weight policy");
}

}  // namespace diracmean::cli
