#pragma once

// Reference values from deterministic tensor-product quadrature (rank <= 3)
// and closed-form complex-Gaussian moments.

#include "diracmean/error.hpp"
#include "diracmean/mean.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace diracmean {

inline constexpr std::size_t kMaxQuadratureRank = 3;
inline constexpr double kQuadratureRelTol = 1e-10;

struct QuadratureSpec {
  std::size_t rank = 1;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t cells_per_axis = 4;

  void validate() const {
    if (rank < 1 || rank > kMaxQuadratureRank) {
      throw Error(ErrorCode::RankUnsupported, "quadrature supports rank 1..3");
    }
    if (lower.size() != rank || upper.size() != rank) {
      throw Error(ErrorCode::InvalidArgument, "quadrature bounds must have one entry per axis");
    }
    for (std::size_t k = 0; k < rank; ++k) {
      if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) || !(lower[k] < upper[k])) {
        throw Error(ErrorCode::InvalidArgument, "quadrature axes need finite lower < upper");
      }
    }
    if (cells_per_axis < 4) throw Error(ErrorCode::InvalidArgument, "cells_per_axis must be >= 4");
  }

  bool operator==(const QuadratureSpec&) const = default;
};

/// The box [-half_width, half_width]^rank.
[[nodiscard]] inline QuadratureSpec symmetric_box(std::size_t rank, double half_width,
                                                  std::size_t cells = 4) {
  return {rank, std::vector<double>(rank, -half_width), std::vector<double>(rank, half_width), cells};
}

[[nodiscard]] inline QuadratureSpec unit_box(std::size_t rank, std::size_t cells = 4) {
  return {rank, std::vector<double>(rank, 0.0), std::vector<double>(rank, 1.0), cells};
}

[[nodiscard]] constexpr std::size_t quadrature_cell_cap(std::size_t rank) noexcept {
  switch (rank) {
    case 1: return 4096;
    case 2: return 512;
    default: return 128;
  }
}

struct QuadratureResult {
  Complex value;
  double abs_value = 0.0;  // integral of |g| with the same rule
  std::size_t cells_used = 0;
};

using ComplexFn = std::function<Complex(std::span<const double>)>;

namespace detail {

// 5-point Gauss-Legendre on [-1,1]; exact through degree 9.
inline constexpr std::array<double, 5> kGaussNodes = {
    -0.906179845938663992797626878299, -0.538469310105683091036314420700, 0.0,
    0.538469310105683091036314420700, 0.906179845938663992797626878299};
inline constexpr std::array<double, 5> kGaussWeights = {
    0.236926885056189087514264040720, 0.478628670499366468041291514836,
    0.568888888888888888888888888889, 0.478628670499366468041291514836,
    0.236926885056189087514264040720};

inline QuadratureResult composite_gauss(const ComplexFn& g, const QuadratureSpec& spec,
                                        std::size_t cells) {
  const std::size_t rank = spec.rank;
  const std::size_t per_axis = cells * kGaussNodes.size();
  std::vector<std::vector<double>> nodes(rank, std::vector<double>(per_axis));
  std::vector<std::vector<double>> weights(rank, std::vector<double>(per_axis));
  for (std::size_t k = 0; k < rank; ++k) {
    const double h = (spec.upper[k] - spec.lower[k]) / static_cast<double>(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      const double mid = spec.lower[k] + (static_cast<double>(c) + 0.5) * h;
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        nodes[k][c * kGaussNodes.size() + q] = mid + 0.5 * h * kGaussNodes[q];
        weights[k][c * kGaussNodes.size() + q] = 0.5 * h * kGaussWeights[q];
      }
    }
  }

  CompensatedComplexSum total;
  CompensatedSum total_abs;
  std::vector<std::size_t> idx(rank, 0);
  std::vector<double> x(rank);
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < rank; ++k) {
      x[k] = nodes[k][idx[k]];
      w *= weights[k][idx[k]];
    }
    const Complex v = g(x);
    total.add(w * v);
    total_abs.add(w * std::abs(v));
    std::size_t k = rank;
    while (k > 0) {
      --k;
      if (++idx[k] < per_axis) break;
      idx[k] = 0;
      if (k == 0) return {total.value(), total_abs.value(), cells};
    }
  }
}

}  // namespace detail

/// Composite 5-point Gauss-Legendre over a uniform tensor grid, doubling the
/// cells per axis until successive results agree within 1e-10 relative to
/// max(|I|, integral of |g|).
[[nodiscard]] inline QuadratureResult tensor_quadrature(const ComplexFn& g,
                                                        const QuadratureSpec& spec) {
  spec.validate();
  const std::size_t cap = quadrature_cell_cap(spec.rank);
  std::size_t cells = std::min(spec.cells_per_axis, cap);
  auto previous = detail::composite_gauss(g, spec, cells);
  while (true) {
    if (cells * 2 > cap) {
      throw Error(ErrorCode::NoConvergence,
                  "quadrature did not converge within " + std::to_string(cap) + " cells per axis");
    }
    cells *= 2;
    auto current = detail::composite_gauss(g, spec, cells);
    const double scale = std::max(std::abs(current.value), current.abs_value);
    if (std::abs(current.value - previous.value) <= kQuadratureRelTol * scale) return current;
    previous = current;
  }
}

inline constexpr double kOracleDegeneracy = 1e-10;

struct OracleValue {
  Complex value;
  std::size_t cells_used = 0;
};

/// integral(f rho) / integral(rho) over the (truncated) box.
[[nodiscard]] inline OracleValue normalized_expectation(const ComplexFn& f, const ComplexFn& rho,
                                                        const QuadratureSpec& spec) {
  const auto den = tensor_quadrature(rho, spec);
  if (std::abs(den.value) < kOracleDegeneracy * den.abs_value || !(std::abs(den.value) > 0.0)) {
    throw Error(ErrorCode::DegenerateOracle, "|integral of rho| is below 1e-10 * integral |rho|");
  }
  const auto num = tensor_quadrature(
      [&](std::span<const double> x) { return f(x) * rho(x); }, spec);
  return {num.value / den.value, std::max(num.cells_used, den.cells_used)};
}

/// Normalized moment of x under xi(x) exp(-i a x^2 / 2) with
/// xi(x) = exp(-x^2 / (2 sigma^2)): moment 0 -> 1, moment 2 -> sigma^2 / (1 + i a sigma^2).
[[nodiscard]] inline Complex complex_gaussian_moment(double curvature, double sigma, int moment) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonpositiveWidth, "sigma must be positive");
  switch (moment) {
    case 0: return {1.0, 0.0};
    case 2: {
      const double s2 = sigma * sigma;
      return s2 / Complex(1.0, curvature * s2);
    }
    default:
      throw Error(ErrorCode::UnsupportedMoment,
                  "moment " + std::to_string(moment) + " (supported: 0, 2)");
  }
}

}  // namespace diracmean
