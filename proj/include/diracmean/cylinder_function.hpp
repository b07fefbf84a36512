#pragma once

#include "diracmean/error.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>

namespace diracmean {

/// f = f o P_d: a (possibly complex) function reading only the first d
/// coordinates of a point. Rank 0 is a constant.
class CylinderFunction {
 public:
  using Base = std::function<std::complex<double>(std::span<const double>)>;

  CylinderFunction(std::size_t rank, Base base, std::string label = {})
      : rank_(rank), base_(std::move(base)), label_(std::move(label)) {}

  [[nodiscard]] std::size_t rank() const noexcept { return rank_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

  [[nodiscard]] std::complex<double> operator()(std::span<const double> x) const {
    if (x.size() < rank_) {
      throw Error(ErrorCode::RankExceeded, "cylinder function '" + label_ + "' of rank " +
                                               std::to_string(rank_) + " evaluated at rank " +
                                               std::to_string(x.size()));
    }
    return base_(x.first(rank_));
  }

 private:
  std::size_t rank_;
  Base base_;
  std::string label_;
};

[[nodiscard]] inline CylinderFunction cylinder_function(std::size_t rank,
                                                        CylinderFunction::Base base,
                                                        std::string label = {}) {
  return CylinderFunction(rank, std::move(base), std::move(label));
}

[[nodiscard]] inline CylinderFunction constant_function(std::complex<double> value) {
  return CylinderFunction(
      0, [value](std::span<const double>) { return value; }, "constant");
}

}  // namespace diracmean
