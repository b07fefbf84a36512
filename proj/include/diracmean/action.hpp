#pragma once

// Action functionals S and product regularizers xi.

#include "diracmean/error.hpp"
#include "diracmean/seq.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace diracmean {

inline constexpr std::size_t kMaxQuadraticRank = 16;

/// Quadratic data of S(x) = 1/2 x^T A x + b^T x + c0 (A row-major).
struct QuadraticForm {
  std::size_t rank = 0;
  std::vector<double> matrix;
  std::vector<double> linear;
  double constant = 0.0;

  [[nodiscard]] double operator()(std::span<const double> x) const {
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < rank; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < rank; ++j) row += matrix[i * rank + j] * x[j];
      quad += x[i] * row;
      lin += linear[i] * x[i];
    }
    return 0.5 * quad + lin + constant;
  }

  bool operator==(const QuadraticForm&) const = default;
};

/// Real action S on rank-d points. Custom actions may also read the sample
/// index, which lets adversarial phase sequences be expressed.
class ActionFunctional {
 public:
  using Fn = std::function<double(Index n, std::span<const double> x)>;

  ActionFunctional(std::size_t rank, Fn fn, std::string label = "custom")
      : rank_(rank), fn_(std::move(fn)), label_(std::move(label)) {}

  explicit ActionFunctional(QuadraticForm form)
      : rank_(form.rank),
        fn_([form](Index, std::span<const double> x) { return form(x); }),
        label_("quadratic"),
        quadratic_(std::move(form)) {}

  [[nodiscard]] std::size_t rank() const noexcept { return rank_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] const std::optional<QuadraticForm>& quadratic() const noexcept {
    return quadratic_;
  }

  [[nodiscard]] double operator()(Index n, std::span<const double> x) const {
    if (x.size() < rank_) throw Error(ErrorCode::RankExceeded, "point rank below action rank");
    return fn_(n, x.first(rank_));
  }
  [[nodiscard]] double operator()(std::span<const double> x) const { return (*this)(0, x); }

 private:
  std::size_t rank_;
  Fn fn_;
  std::string label_;
  std::optional<QuadraticForm> quadratic_;
};

/// S(x) = 1/2 x^T A x + b^T x + c0. `matrix` is row-major d x d; an empty
/// `linear` means b = 0.
[[nodiscard]] inline ActionFunctional quadratic_action(std::size_t rank, std::vector<double> matrix,
                                                       std::vector<double> linear = {},
                                                       double constant = 0.0) {
  if (rank > kMaxQuadraticRank) {
    throw Error(ErrorCode::RankUnsupported, "quadratic actions are limited to rank 16");
  }
  if (matrix.size() != rank * rank) {
    throw Error(ErrorCode::InvalidArgument, "matrix must have rank*rank entries");
  }
  if (linear.empty()) linear.assign(rank, 0.0);
  if (linear.size() != rank) throw Error(ErrorCode::InvalidArgument, "linear term size != rank");
  for (std::size_t i = 0; i < rank; ++i) {
    for (std::size_t j = i + 1; j < rank; ++j) {
      if (matrix[i * rank + j] != matrix[j * rank + i]) {
        throw Error(ErrorCode::AsymmetricMatrix, "A(" + std::to_string(i) + "," +
                                                     std::to_string(j) + ") != A(" +
                                                     std::to_string(j) + "," +
                                                     std::to_string(i) + ")");
      }
    }
  }
  return ActionFunctional(QuadraticForm{rank, std::move(matrix), std::move(linear), constant});
}

/// Adversarial action S(x_n) = pi * n; its oscillatory weights alternate +-1.
[[nodiscard]] inline ActionFunctional alternating_phase_action() {
  return ActionFunctional(
      0, [](Index n, std::span<const double>) { return std::numbers::pi * static_cast<double>(n); },
      "alternating");
}

/// Gaussian product regularizer xi(x) = prod_k exp(-x_k^2 / (2 sigma_k^2)).
class Regularizer {
 public:
  explicit Regularizer(std::vector<double> widths) : widths_(std::move(widths)) {
    if (widths_.empty()) throw Error(ErrorCode::NonpositiveWidth, "empty width list");
    for (double s : widths_) {
      if (!(s > 0.0) || !std::isfinite(s)) {
        throw Error(ErrorCode::NonpositiveWidth, "regularizer widths must be positive");
      }
    }
  }

  [[nodiscard]] std::size_t rank() const noexcept { return widths_.size(); }
  [[nodiscard]] const std::vector<double>& widths() const noexcept { return widths_; }

  [[nodiscard]] double log_factor(std::size_t k, double t) const {
    const double s = widths_.at(k);
    return -0.5 * t * t / (s * s);
  }
  [[nodiscard]] double factor(std::size_t k, double t) const { return std::exp(log_factor(k, t)); }

  [[nodiscard]] double log_value(std::span<const double> x) const {
    if (x.size() < rank()) throw Error(ErrorCode::RankExceeded, "point rank below regularizer rank");
    double acc = 0.0;
    for (std::size_t k = 0; k < rank(); ++k) acc += log_factor(k, x[k]);
    return acc;
  }
  [[nodiscard]] double operator()(std::span<const double> x) const { return std::exp(log_value(x)); }

  /// Quantiles of the normalized xi product measure.
  [[nodiscard]] QuantileFamily quantiles() const { return normal_family(widths_); }

  /// Half-width of the truncated box carrying all but ~1e-14 of each factor's mass.
  [[nodiscard]] double truncation(std::size_t k) const { return 8.0 * std::max(widths_.at(k), 1.0); }

 private:
  std::vector<double> widths_;
};

[[nodiscard]] inline Regularizer gaussian_regularizer(std::vector<double> widths) {
  return Regularizer(std::move(widths));
}

}  // namespace diracmean
