#pragma once

// Weight policies: the complex weight alpha_n attached to the n-th point.

#include "diracmean/action.hpp"
#include "diracmean/error.hpp"
#include "diracmean/seq.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>

namespace diracmean {

using Complex = std::complex<double>;

enum class PolicyKind { Constant, Density, Boltzmann, Oscillatory, ProductRegularized };

/// Largest negative action accepted by the Boltzmann policy before exp(-S)
/// leaves the double range.
inline constexpr double kBoltzmannActionFloor = -700.0;

class WeightPolicy {
 public:
  using Fn = std::function<Complex(Index n, std::span<const double> x)>;

  WeightPolicy(PolicyKind kind, std::size_t rank, Fn fn)
      : kind_(kind), rank_(rank), fn_(std::move(fn)) {}

  [[nodiscard]] PolicyKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t rank() const noexcept { return rank_; }

  /// Weight of point n; x must carry at least rank() coordinates.
  [[nodiscard]] Complex operator()(Index n, std::span<const double> x) const {
    if (x.size() < rank_) throw Error(ErrorCode::RankExceeded, "point rank below policy rank");
    return fn_(n, x.first(rank_));
  }

  /// Same policy with every weight multiplied by c.
  [[nodiscard]] WeightPolicy scaled(Complex c) const {
    return WeightPolicy(kind_, rank_,
                        [fn = fn_, c](Index n, std::span<const double> x) { return c * fn(n, x); });
  }

 private:
  PolicyKind kind_;
  std::size_t rank_;
  Fn fn_;
};

[[nodiscard]] inline WeightPolicy constant_policy() {
  return WeightPolicy(PolicyKind::Constant, 0,
                      [](Index, std::span<const double>) { return Complex(1.0, 0.0); });
}

using ScalarFn = std::function<double(std::span<const double>)>;

/// alpha_n = phi(first `rank` coordinates of x_n).
[[nodiscard]] inline WeightPolicy density_policy(ScalarFn phi, std::size_t rank) {
  return WeightPolicy(PolicyKind::Density, rank,
                      [phi = std::move(phi)](Index n, std::span<const double> x) {
                        const double w = phi(x);
                        if (w < 0.0) {
                          throw Error(ErrorCode::NegativeDensity,
                                      "density " + std::to_string(w) + " at sample " +
                                          std::to_string(n));
                        }
                        return Complex(w, 0.0);
                      });
}

/// alpha_n = exp(-S(x_n)). Underflow to zero is accepted; S < -700 raises.
[[nodiscard]] inline WeightPolicy boltzmann_policy(ActionFunctional action) {
  const auto rank = action.rank();
  return WeightPolicy(PolicyKind::Boltzmann, rank,
                      [action = std::move(action)](Index n, std::span<const double> x) {
                        const double s = action(n, x);
                        if (s < kBoltzmannActionFloor) {
                          throw Error(ErrorCode::WeightOverflow,
                                      "exp(-S) overflows for S=" + std::to_string(s) +
                                          " at sample " + std::to_string(n));
                        }
                        return Complex(std::exp(-s), 0.0);
                      });
}

[[nodiscard]] inline Complex unit_phase(double s) { return {std::cos(s), -std::sin(s)}; }

/// alpha_n = exp(-i S(x_n)).
[[nodiscard]] inline WeightPolicy oscillatory_policy(ActionFunctional action) {
  const auto rank = action.rank();
  return WeightPolicy(PolicyKind::Oscillatory, rank,
                      [action = std::move(action)](Index n, std::span<const double> x) {
                        return unit_phase(action(n, x));
                      });
}

/// alpha_n = xi(x_n) exp(-i S(x_n)).
[[nodiscard]] inline WeightPolicy product_regularized_policy(ScalarFn xi, std::size_t xi_rank,
                                                             ActionFunctional action) {
  const auto rank = std::max(xi_rank, action.rank());
  return WeightPolicy(
      PolicyKind::ProductRegularized, rank,
      [xi = std::move(xi), xi_rank, action = std::move(action)](Index n, std::span<const double> x) {
        const double w = xi(x.first(xi_rank));
        if (w < 0.0) {
          throw Error(ErrorCode::NegativeDensity,
                      "regularizer " + std::to_string(w) + " at sample " + std::to_string(n));
        }
        return w * unit_phase(action(n, x));
      });
}

[[nodiscard]] inline WeightPolicy product_regularized_policy(const Regularizer& xi,
                                                             ActionFunctional action) {
  return product_regularized_policy([xi](std::span<const double> x) { return xi(x); }, xi.rank(),
                                    std::move(action));
}

}  // namespace diracmean
