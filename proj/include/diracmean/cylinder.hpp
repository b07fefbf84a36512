#pragma once

#include "diracmean/cylinder_function.hpp"
#include "diracmean/equidistribution.hpp"
#include "diracmean/error.hpp"
#include "diracmean/mean.hpp"
#include "diracmean/seq.hpp"
#include "diracmean/weights.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace diracmean {

/// Strictly increasing coordinate-truncation ranks d_0 < d_1 < ... (d_0 >= 1).
class ProjectionHierarchy {
 public:
  explicit ProjectionHierarchy(std::vector<std::size_t> ranks) : ranks_(std::move(ranks)) {
    if (ranks_.empty()) throw Error(ErrorCode::InvalidArgument, "empty projection hierarchy");
    if (ranks_.front() < 1) throw Error(ErrorCode::InvalidArgument, "hierarchy ranks start at 1");
    for (std::size_t i = 1; i < ranks_.size(); ++i) {
      if (ranks_[i] <= ranks_[i - 1]) {
        throw Error(ErrorCode::InvalidArgument, "hierarchy ranks must be strictly increasing");
      }
    }
  }

  [[nodiscard]] const std::vector<std::size_t>& ranks() const noexcept { return ranks_; }

 private:
  std::vector<std::size_t> ranks_;
};

inline constexpr std::size_t kCylinderProbeCount = 16;
inline constexpr std::uint64_t kCylinderProbeSeed = 0x5EEDC0FFEEULL;

/// Probes f at 16 pseudorandom points: perturbing coordinate rank+1 (and
/// re-evaluating) must leave the value bit-identical.
inline void check_cylinder_property(const CylinderFunction& f) {
  const auto probe = pseudorandom_source(kCylinderProbeSeed);
  const std::size_t d = f.rank();
  std::vector<double> x(d + 1);
  for (Index n = 0; n < kCylinderProbeCount; ++n) {
    probe.fill(n, x);
    const auto reference = f(x);
    x[d] = probe.coordinate(n + kCylinderProbeCount, d);
    const auto perturbed = f(x);
    if (!(perturbed == reference)) {
      throw Error(ErrorCode::CylinderViolation,
                  "'" + f.label() + "' changed when coordinate " + std::to_string(d + 1) +
                      " was perturbed; declared rank " + std::to_string(d));
    }
  }
}

/// mean::run after verifying the cylinder property. Points are drawn at rank
/// max(f.rank(), policy.rank()), the same path mean::run takes.
[[nodiscard]] inline ConvergenceReport integrate_cylinder(const CylinderFunction& f,
                                                          const PointSource& source,
                                                          const WeightPolicy& policy,
                                                          const RunOptions& options) {
  check_cylinder_property(f);
  return run(source, policy, f, options);
}

/// Largest bins-per-axis b <= cap with 5 * b^rank <= N (at least 2).
[[nodiscard]] inline std::size_t default_bins_per_axis(std::size_t rank, std::size_t sample_count,
                                                       std::size_t cap = 16) {
  std::size_t best = 2;
  for (std::size_t b = 2; b <= cap; ++b) {
    double cells = 1.0;
    for (std::size_t i = 0; i < rank; ++i) cells *= static_cast<double>(b);
    if (cells * kMinExpectedPerCell <= static_cast<double>(sample_count)) best = b;
  }
  return best;
}

struct HierarchyCertificate {
  std::vector<EquidistributionReport> reports;

  [[nodiscard]] bool pass() const noexcept {
    return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  }
};

/// One chi-square report per hierarchy rank. `bins_per_axis` may be empty
/// (automatic per rank), a single value for all ranks, or one per rank.
[[nodiscard]] inline HierarchyCertificate hierarchy_certify(
    const PointSource& source, const ProjectionHierarchy& hierarchy, std::size_t sample_count,
    double level = kDefaultSignificance, const std::vector<std::size_t>& bins_per_axis = {}) {
  const auto& ranks = hierarchy.ranks();
  if (bins_per_axis.size() > 1 && bins_per_axis.size() != ranks.size()) {
    throw Error(ErrorCode::InvalidArgument, "bins_per_axis must have one entry per rank");
  }
  HierarchyCertificate cert;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const std::size_t bins = bins_per_axis.empty()       ? default_bins_per_axis(ranks[i], sample_count)
                             : bins_per_axis.size() == 1 ? bins_per_axis.front()
                                                         : bins_per_axis[i];
    cert.reports.push_back(equidistribution_statistic(source, ranks[i], sample_count, bins, level));
  }
  return cert;
}

}  // namespace diracmean
