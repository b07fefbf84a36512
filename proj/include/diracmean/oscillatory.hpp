#pragma once

// Fresnel-type normalized integrals
//
//   integral f xi e^{-iS} / integral xi e^{-iS}
//
// as Dirac means. The pullback route draws points from the normalized xi
// product measure and weighs them by e^{-iS}; the weight-borne route draws
// uniform points on a truncated box and carries xi in the weight.

#include "diracmean/action.hpp"
#include "diracmean/cylinder.hpp"
#include "diracmean/error.hpp"
#include "diracmean/mean.hpp"
#include "diracmean/oracle.hpp"
#include "diracmean/seq.hpp"
#include "diracmean/weights.hpp"

#include <cstddef>
#include <future>
#include <numeric>
#include <string_view>
#include <vector>

namespace diracmean {

enum class FresnelRoute { Pullback, WeightBorne };

[[nodiscard]] constexpr std::string_view to_string(FresnelRoute r) noexcept {
  return r == FresnelRoute::Pullback ? "pullback" : "weight-borne";
}

struct OscillatoryOptions {
  RunOptions run;
  FresnelRoute route = FresnelRoute::Pullback;
  /// Certify the base on ranks 1..rank(xi) before running.
  bool certify_base = false;
  std::size_t certify_samples = 10'000;
  double certify_level = kDefaultSignificance;
};

/// Points and weights realizing one route, exposed for inspection.
struct FresnelSetup {
  PointSource points;
  WeightPolicy policy;
};

[[nodiscard]] inline FresnelSetup fresnel_setup(const PointSource& base, const ActionFunctional& action,
                                                const Regularizer& xi, FresnelRoute route) {
  if (base.codomain() != Codomain::UnitCube) {
    throw Error(ErrorCode::InvalidArgument, "oscillatory mean needs a unit-cube base source");
  }
  if (action.rank() > xi.rank()) {
    throw Error(ErrorCode::InvalidArgument, "action rank exceeds regularizer rank");
  }
  if (route == FresnelRoute::Pullback) {
    return {pullback_source(base, xi.quantiles()), oscillatory_policy(action)};
  }
  std::vector<double> lower(xi.rank());
  std::vector<double> upper(xi.rank());
  for (std::size_t k = 0; k < xi.rank(); ++k) {
    upper[k] = xi.truncation(k);
    lower[k] = -upper[k];
  }
  return {pullback_source(base, uniform_family(std::move(lower), std::move(upper))),
          product_regularized_policy(xi, action)};
}

[[nodiscard]] inline ConvergenceReport oscillatory_mean(const PointSource& base,
                                                        const ActionFunctional& action,
                                                        const Regularizer& xi,
                                                        const CylinderFunction& f,
                                                        const OscillatoryOptions& options = {}) {
  if (f.rank() > xi.rank()) {
    throw Error(ErrorCode::InvalidArgument, "function rank exceeds regularizer rank");
  }
  if (options.certify_base) {
    std::vector<std::size_t> ranks(xi.rank());
    std::iota(ranks.begin(), ranks.end(), std::size_t{1});
    const auto cert = hierarchy_certify(base, ProjectionHierarchy(ranks), options.certify_samples,
                                        options.certify_level);
    if (!cert.pass()) {
      throw Error(ErrorCode::CertificationFailed, "base source failed equidistribution certification");
    }
  }
  const auto setup = fresnel_setup(base, action, xi, options.route);
  return integrate_cylinder(f, setup.points, setup.policy, options.run);
}

[[nodiscard]] inline CylinderFunction first_coordinate_squared() {
  return cylinder_function(
      1, [](std::span<const double> x) { return Complex(x[0] * x[0], 0.0); }, "x1^2");
}

struct ScanEntry {
  double sigma = 0.0;
  ConvergenceReport report;
  Complex closed_form;
};

/// One oscillatory mean of x^2 per width, with S(x) = a x^2 / 2 in rank 1.
/// As sigma grows the values drift toward -i / a.
[[nodiscard]] inline std::vector<ScanEntry> fresnel_limit_scan(const PointSource& base,
                                                               double curvature,
                                                               const std::vector<double>& sigmas,
                                                               const OscillatoryOptions& options = {}) {
  if (curvature == 0.0) throw Error(ErrorCode::InvalidArgument, "curvature must be nonzero");
  if (sigmas.empty()) throw Error(ErrorCode::InvalidArgument, "empty sigma list");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) throw Error(ErrorCode::NonpositiveWidth, "sigma must be positive");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sigma list must be increasing");
    }
  }
  const auto action = quadratic_action(1, {curvature});
  const auto f = first_coordinate_squared();

  std::vector<std::future<ScanEntry>> jobs;
  jobs.reserve(sigmas.size());
  for (double sigma : sigmas) {
    jobs.push_back(std::async(std::launch::async, [&, sigma] {
      ScanEntry entry;
      entry.sigma = sigma;
      entry.report = oscillatory_mean(base, action, gaussian_regularizer({sigma}), f, options);
      entry.closed_form = complex_gaussian_moment(curvature, sigma, 2);
      return entry;
    }));
  }
  std::vector<ScanEntry> out;
  out.reserve(sigmas.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

}  // namespace diracmean
