#pragma once

// Built-in sources, functions, actions and policies addressable by name.

#include "config.hpp"

#include <diracmean/action.hpp>
#include <diracmean/cylinder_function.hpp>
#include <diracmean/oscillatory.hpp>
#include <diracmean/seq.hpp>
#include <diracmean/weights.hpp>

#include <cstddef>

namespace diracmean::cli {

[[nodiscard]] std::size_t function_rank(const FunctionSpec& spec);
[[nodiscard]] std::size_t action_rank(const ActionSpec& spec);

[[nodiscard]] CylinderFunction make_function(const FunctionSpec& spec);
[[nodiscard]] ActionFunctional make_action(const ActionSpec& spec);

/// Unit-cube source before any pullback.
[[nodiscard]] PointSource make_base_source(const SourceSpec& spec);
[[nodiscard]] QuantileFamily make_pullback(const SourceSpec& spec);
/// Base source followed by the configured pullback (identity leaves it unchanged).
[[nodiscard]] PointSource make_source(const SourceSpec& spec);

[[nodiscard]] Regularizer make_regularizer(const PolicySpec& spec);
[[nodiscard]] FresnelRoute make_route(const PolicySpec& spec);

/// Non-fresnel policies only; fresnel runs go through oscillatory_mean.
[[nodiscard]] WeightPolicy make_policy(const PolicySpec& spec);

}  // namespace diracmean::cli
