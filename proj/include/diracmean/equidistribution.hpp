#pragma once

#include "diracmean/error.hpp"
#include "diracmean/seq.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace diracmean {

inline constexpr double kDefaultSignificance = 0.999;
inline constexpr std::size_t kMinExpectedPerCell = 5;

struct EquidistributionReport {
  std::size_t rank = 0;
  std::size_t sample_count = 0;
  std::size_t bins_per_axis = 0;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Upper chi-square quantile with `dof` degrees of freedom at probability `level`.
[[nodiscard]] inline double chi_square_threshold(std::size_t dof, double level) {
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(dof));
  return boost::math::quantile(dist, level);
}

[[nodiscard]] inline std::size_t cell_count(std::size_t bins_per_axis, std::size_t rank) {
  std::size_t cells = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    if (cells > std::numeric_limits<std::size_t>::max() / bins_per_axis) {
      throw Error(ErrorCode::InsufficientSample, "bin grid too large");
    }
    cells *= bins_per_axis;
  }
  return cells;
}

/// Chi-square test of the binned counts of the first `sample_count`
/// rank-truncated points against the uniform expectation.
[[nodiscard]] inline EquidistributionReport equidistribution_statistic(
    const PointSource& source, std::size_t rank, std::size_t sample_count,
    std::size_t bins_per_axis, double level = kDefaultSignificance) {
  if (source.codomain() != Codomain::UnitCube) {
    throw Error(ErrorCode::InvalidArgument, "equidistribution needs a unit-cube source");
  }
  if (rank < 1 || bins_per_axis < 2) {
    throw Error(ErrorCode::InvalidArgument, "rank >= 1 and bins_per_axis >= 2 required");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "significance level must lie in (0,1)");
  }
  const std::size_t cells = cell_count(bins_per_axis, rank);
  if (cells > sample_count / kMinExpectedPerCell) {
    throw Error(ErrorCode::InsufficientSample,
                "need N >= 5 * bins^rank = " + std::to_string(cells * kMinExpectedPerCell) +
                    " samples, got " + std::to_string(sample_count));
  }

  std::vector<std::uint64_t> counts(cells, 0);
  std::vector<double> x(rank);
  const double bins = static_cast<double>(bins_per_axis);
  for (std::size_t n = 0; n < sample_count; ++n) {
    source.fill(n, x);
    std::size_t cell = 0;
    for (std::size_t k = 0; k < rank; ++k) {
      auto b = static_cast<std::size_t>(std::floor(x[k] * bins));
      b = std::min(b, bins_per_axis - 1);
      cell = cell * bins_per_axis + b;
    }
    ++counts[cell];
  }

  const double expected = static_cast<double>(sample_count) / static_cast<double>(cells);
  double chi2 = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }

  EquidistributionReport report;
  report.rank = rank;
  report.sample_count = sample_count;
  report.bins_per_axis = bins_per_axis;
  report.statistic = chi2;
  report.threshold = chi_square_threshold(cells - 1, level);
  report.pass = report.statistic <= report.threshold;
  return report;
}

namespace detail {

inline double star_discrepancy_1d(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - xs[i];
    const double below = xs[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

// Critical boxes [0,a) x [0,b) and [0,a] x [0,b] with a, b drawn from the
// sample coordinates and 1. The x-axis is swept in sorted order while the
// y-values of points with x < a (open) and x <= a (closed) stay sorted.
inline double star_discrepancy_2d(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  const double nd = static_cast<double>(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto l, auto r) { return xs[l] < xs[r]; });

  std::vector<double> b_grid(ys);
  b_grid.push_back(1.0);
  std::sort(b_grid.begin(), b_grid.end());
  b_grid.erase(std::unique(b_grid.begin(), b_grid.end()), b_grid.end());

  std::vector<double> a_grid(xs);
  a_grid.push_back(1.0);
  std::sort(a_grid.begin(), a_grid.end());
  a_grid.erase(std::unique(a_grid.begin(), a_grid.end()), a_grid.end());

  std::vector<double> open_ys;    // y of points with x < a
  std::vector<double> closed_ys;  // y of points with x <= a
  open_ys.reserve(n);
  closed_ys.reserve(n);
  std::size_t open_next = 0;
  std::size_t closed_next = 0;
  double d = 0.0;

  for (double a : a_grid) {
    while (open_next < n && xs[order[open_next]] < a) {
      const double y = ys[order[open_next++]];
      open_ys.insert(std::upper_bound(open_ys.begin(), open_ys.end(), y), y);
    }
    while (closed_next < n && xs[order[closed_next]] <= a) {
      const double y = ys[order[closed_next++]];
      closed_ys.insert(std::upper_bound(closed_ys.begin(), closed_ys.end(), y), y);
    }
    std::size_t open_count = 0;
    std::size_t closed_count = 0;
    for (double b : b_grid) {
      while (open_count < open_ys.size() && open_ys[open_count] < b) ++open_count;
      while (closed_count < closed_ys.size() && closed_ys[closed_count] <= b) ++closed_count;
      const double volume = a * b;
      d = std::max({d, volume - static_cast<double>(open_count) / nd,
                    static_cast<double>(closed_count) / nd - volume});
    }
  }
  return d;
}

}  // namespace detail

inline constexpr std::size_t kMaxDiscrepancySamples = 4096;

/// Exact star discrepancy of the first N points, rank 1 or 2.
[[nodiscard]] inline double star_discrepancy(const PointSource& source, std::size_t rank,
                                             std::size_t sample_count) {
  if (rank < 1 || rank > 2) {
    throw Error(ErrorCode::RankUnsupported, "star discrepancy is implemented for rank 1 and 2");
  }
  if (source.codomain() != Codomain::UnitCube) {
    throw Error(ErrorCode::InvalidArgument, "star discrepancy needs a unit-cube source");
  }
  if (sample_count < 1 || sample_count > kMaxDiscrepancySamples) {
    throw Error(ErrorCode::InvalidArgument, "star discrepancy needs 1 <= N <= 4096");
  }
  std::vector<double> xs(sample_count);
  std::vector<double> ys(rank == 2 ? sample_count : 0);
  for (std::size_t n = 0; n < sample_count; ++n) {
    xs[n] = source.coordinate(n, 0);
    if (rank == 2) ys[n] = source.coordinate(n, 1);
  }
  return rank == 1 ? detail::star_discrepancy_1d(std::move(xs))
                   : detail::star_discrepancy_2d(xs, ys);
}

}  // namespace diracmean
