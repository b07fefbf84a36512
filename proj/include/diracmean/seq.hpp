#pragma once

// Deterministic, truncation-consistent point sequences on the infinite cube
// [0,1)^N and their coordinatewise pullbacks to R^N.
//
// Every source is a pure indexed function (n, k) -> coordinate. A point of
// rank d is the first d coordinates of the n-th element, so truncation
// consistency holds by construction and concurrent reads need no locking.

#include "diracmean/error.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/prime.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace diracmean {

using Index = std::uint64_t;

inline constexpr std::size_t kUnboundedRank = std::numeric_limits<std::size_t>::max();

struct Point {
  std::vector<double> coords;

  [[nodiscard]] std::size_t rank() const noexcept { return coords.size(); }
  [[nodiscard]] double operator[](std::size_t k) const { return coords[k]; }
  bool operator==(const Point&) const = default;
};

enum class SourceKind { Halton, Weyl, Pseudorandom, Convergent, Constant, Pullback, Truncated };
enum class Codomain { UnitCube, RealLineProduct };

class PointSource {
 public:
  using CoordinateFn = std::function<double(Index n, std::size_t k)>;

  PointSource(SourceKind kind, Codomain codomain, CoordinateFn coordinate,
              std::size_t max_rank = kUnboundedRank)
      : kind_(kind),
        codomain_(codomain),
        max_rank_(max_rank),
        coordinate_(std::make_shared<const CoordinateFn>(std::move(coordinate))) {}

  [[nodiscard]] SourceKind kind() const noexcept { return kind_; }
  [[nodiscard]] Codomain codomain() const noexcept { return codomain_; }
  [[nodiscard]] std::size_t max_rank() const noexcept { return max_rank_; }

  [[nodiscard]] double coordinate(Index n, std::size_t k) const {
    if (k >= max_rank_) {
      throw Error(ErrorCode::RankExceeded, "coordinate " + std::to_string(k) +
                                               " requested from a source of rank " +
                                               std::to_string(max_rank_));
    }
    return (*coordinate_)(n, k);
  }

  /// Writes the rank-out.size() truncation of point n into out.
  void fill(Index n, std::span<double> out) const {
    if (out.size() > max_rank_) {
      throw Error(ErrorCode::RankExceeded, "rank " + std::to_string(out.size()) +
                                               " exceeds source rank " + std::to_string(max_rank_));
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*coordinate_)(n, k);
  }

 private:
  SourceKind kind_;
  Codomain codomain_;
  std::size_t max_rank_;
  std::shared_ptr<const CoordinateFn> coordinate_;
};

[[nodiscard]] inline Point point_at(const PointSource& source, Index n, std::size_t d) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "point rank must be at least 1");
  Point p{std::vector<double>(d)};
  source.fill(n, p.coords);
  return p;
}

namespace detail {

// Value at position k of a per-coordinate list; the last entry extends to
// all later coordinates.
inline double extended(const std::vector<double>& values, std::size_t k) {
  return values[std::min(k, values.size() - 1)];
}

inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  const double inv_base = 1.0 / static_cast<double>(base);
  double scale = inv_base;
  double r = 0.0;
  while (index > 0) {
    r += scale * static_cast<double>(index % base);
    index /= base;
    scale *= inv_base;
  }
  return r;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Halton
// ---------------------------------------------------------------------------

inline constexpr std::size_t kHaltonMaxRank = boost::math::max_prime + 1;

/// Coordinate k is the radical inverse of (n + index_offset) in the (k+1)-th prime.
[[nodiscard]] inline PointSource halton_source(std::uint64_t index_offset = 0) {
  return PointSource(
      SourceKind::Halton, Codomain::UnitCube,
      [index_offset](Index n, std::size_t k) {
        return detail::radical_inverse(n + index_offset,
                                       boost::math::prime(static_cast<unsigned>(k)));
      },
      kHaltonMaxRank);
}

// ---------------------------------------------------------------------------
// Weyl / Kronecker
// ---------------------------------------------------------------------------

using WideFloat = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<512, boost::multiprecision::digit_base_2>>;

/// Irrational generator stored as an unevaluated sum hi + lo of doubles so
/// that frac(n * alpha) keeps ~100 bits of the generator.
struct WeylGenerator {
  double hi = 0.0;
  double lo = 0.0;

  [[nodiscard]] static WeylGenerator from_wide(const WideFloat& alpha) {
    WeylGenerator g;
    g.hi = static_cast<double>(alpha);
    g.lo = static_cast<double>(alpha - WideFloat(g.hi));
    return g;
  }

  [[nodiscard]] double frac_multiple(Index n) const noexcept {
    const double m = static_cast<double>(n);
    const double p = m * hi;
    const double err = std::fma(m, hi, -p);
    double r = p - std::floor(p);
    r += err + m * lo;
    r -= std::floor(r);
    return r;
  }
};

inline constexpr std::uint64_t kMaxRationalDenominator = 1'000'000;

/// True when alpha has a continued-fraction convergent p/q with q <= max_den
/// followed by a partial quotient larger than max_den (or a terminating
/// expansion), i.e. |alpha - p/q| < 1/(max_den * q^2).
[[nodiscard]] inline bool looks_rational(const WideFloat& alpha,
                                         std::uint64_t max_den = kMaxRationalDenominator) {
  const WideFloat eps = boost::multiprecision::ldexp(WideFloat(1), -480);
  const WideFloat limit(max_den);
  WideFloat rest = alpha - floor(alpha);
  WideFloat q_prev = 0;
  WideFloat q = 1;
  for (int iter = 0; iter < 256; ++iter) {
    if (rest < eps) return true;
    const WideFloat x = 1 / rest;
    const WideFloat a = floor(x);
    rest = x - a;
    if (a > limit) return true;
    const WideFloat q_next = a * q + q_prev;
    if (q_next > limit) return false;
    q_prev = q;
    q = q_next;
  }
  return false;
}

[[nodiscard]] inline WeylGenerator parse_weyl_generator(const std::string& decimal) {
  WideFloat alpha;
  try {
    alpha = WideFloat(decimal);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadGenerator, "unparseable generator '" + decimal + "'");
  }
  if (!(alpha > 0 && alpha < 1)) {
    throw Error(ErrorCode::BadGenerator, "generator '" + decimal + "' outside (0,1)");
  }
  if (looks_rational(alpha)) {
    throw Error(ErrorCode::BadGenerator,
                "generator '" + decimal + "' is rational-looking (small denominator)");
  }
  return WeylGenerator::from_wide(alpha);
}

/// frac(pi^k) for k = 1..count, evaluated in 512-bit binary floating point.
[[nodiscard]] inline std::vector<WideFloat> pi_power_fractions(std::size_t count) {
  if (count > 256) {
    throw Error(ErrorCode::RankUnsupported, "pi-power generators are limited to 256 coordinates");
  }
  const WideFloat pi = boost::math::constants::pi<WideFloat>();
  std::vector<WideFloat> out;
  out.reserve(count);
  WideFloat power = 1;
  for (std::size_t k = 0; k < count; ++k) {
    power *= pi;
    out.push_back(power - floor(power));
  }
  return out;
}

/// Coordinate k of point n is frac(n * alpha_k). Rank equals alphas.size().
[[nodiscard]] inline PointSource weyl_source(const std::vector<std::string>& alphas,
                                             std::uint64_t index_offset = 0) {
  if (alphas.empty()) throw Error(ErrorCode::BadGenerator, "empty generator list");
  std::vector<WeylGenerator> gens;
  gens.reserve(alphas.size());
  for (const auto& a : alphas) gens.push_back(parse_weyl_generator(a));
  const auto rank = gens.size();
  return PointSource(
      SourceKind::Weyl, Codomain::UnitCube,
      [gens = std::move(gens), index_offset](Index n, std::size_t k) {
        return gens[k].frac_multiple(n + index_offset);
      },
      rank);
}

/// Weyl source with the default generators alpha_k = frac(pi^(k+1)).
[[nodiscard]] inline PointSource weyl_pi_source(std::size_t rank = 64,
                                                std::uint64_t index_offset = 0) {
  std::vector<WeylGenerator> gens;
  for (const auto& f : pi_power_fractions(rank)) gens.push_back(WeylGenerator::from_wide(f));
  return PointSource(
      SourceKind::Weyl, Codomain::UnitCube,
      [gens = std::move(gens), index_offset](Index n, std::size_t k) {
        return gens[k].frac_multiple(n + index_offset);
      },
      rank);
}

// ---------------------------------------------------------------------------
// Counter-based pseudorandom
// ---------------------------------------------------------------------------

[[nodiscard]] inline double counter_uniform(std::uint64_t seed, Index n, std::size_t k) noexcept {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::splitmix64(h ^ detail::splitmix64(n + 0x632BE59BD9B4E019ULL));
  h = detail::splitmix64(h ^ detail::splitmix64(static_cast<std::uint64_t>(k) + 0x8CB92BA72F3D8DD7ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

[[nodiscard]] inline PointSource pseudorandom_source(std::uint64_t seed) {
  return PointSource(SourceKind::Pseudorandom, Codomain::UnitCube,
                     [seed](Index n, std::size_t k) { return counter_uniform(seed, n, k); });
}

// ---------------------------------------------------------------------------
// Convergent and constant sources
// ---------------------------------------------------------------------------

/// x_{n,k} = clamp(target_k + rate^n * offset_k, 0, 1). Per-coordinate lists
/// extend their last entry to all later coordinates.
[[nodiscard]] inline PointSource convergent_source(std::vector<double> target, double rate,
                                                   std::vector<double> offset = {1.0}) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "convergent rate must lie in (0,1)");
  }
  if (target.empty() || offset.empty()) {
    throw Error(ErrorCode::InvalidArgument, "convergent target and offset must be non-empty");
  }
  return PointSource(SourceKind::Convergent, Codomain::UnitCube,
                     [target = std::move(target), offset = std::move(offset), rate](Index n,
                                                                                    std::size_t k) {
                       const double x = detail::extended(target, k) +
                                        std::pow(rate, static_cast<double>(n)) *
                                            detail::extended(offset, k);
                       return std::clamp(x, 0.0, 1.0);
                     });
}

/// Every coordinate of every point equals value. Used as an adversarial
/// non-equidistributed source.
[[nodiscard]] inline PointSource constant_source(double value) {
  return PointSource(SourceKind::Constant, Codomain::UnitCube,
                     [value](Index, std::size_t) { return value; });
}

/// Restricts a source to its first `rank` coordinates.
[[nodiscard]] inline PointSource truncated_source(const PointSource& base, std::size_t rank) {
  return PointSource(
      SourceKind::Truncated, base.codomain(),
      [base](Index n, std::size_t k) { return base.coordinate(n, k); },
      std::min(rank, base.max_rank()));
}

// ---------------------------------------------------------------------------
// Quantile families and pullback
// ---------------------------------------------------------------------------

/// Per-coordinate quantile functions of a product probability measure, with
/// the matching densities (used by quadrature oracles).
class QuantileFamily {
 public:
  using QuantileFn = std::function<double(std::size_t k, double u)>;
  using DensityFn = std::function<double(std::size_t k, double x)>;
  using SupportFn = std::function<std::pair<double, double>(std::size_t k)>;

  QuantileFamily(std::string name, QuantileFn quantile, DensityFn density, SupportFn support,
                 bool open_domain)
      : name_(std::move(name)),
        quantile_(std::move(quantile)),
        density_(std::move(density)),
        support_(std::move(support)),
        open_domain_(open_domain) {}

  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  /// Quantile q_k(u). Families with unbounded support reject u in {0,1}.
  [[nodiscard]] double quantile(std::size_t k, double u) const {
    if (open_domain_ ? !(u > 0.0 && u < 1.0) : !(u >= 0.0 && u <= 1.0)) {
      throw Error(ErrorCode::QuantileDomain,
                  "quantile of '" + name_ + "' undefined at u=" + std::to_string(u));
    }
    return quantile_(k, u);
  }

  [[nodiscard]] double density(std::size_t k, double x) const { return density_(k, x); }
  [[nodiscard]] std::pair<double, double> support(std::size_t k) const { return support_(k); }
  [[nodiscard]] bool open_domain() const noexcept { return open_domain_; }

 private:
  std::string name_;
  QuantileFn quantile_;
  DensityFn density_;
  SupportFn support_;
  bool open_domain_;
};

/// Centered normal coordinates with standard deviations sigma_k.
[[nodiscard]] inline QuantileFamily normal_family(std::vector<double> sigmas) {
  if (sigmas.empty()) throw Error(ErrorCode::NonpositiveWidth, "empty width list");
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::NonpositiveWidth, "normal width must be positive");
    }
  }
  auto q = [sigmas](std::size_t k, double u) {
    const boost::math::normal_distribution<double> dist(0.0, detail::extended(sigmas, k));
    return boost::math::quantile(dist, u);
  };
  auto pdf = [sigmas](std::size_t k, double x) {
    const double s = detail::extended(sigmas, k);
    return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
  };
  auto support = [](std::size_t) {
    return std::pair{-std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity()};
  };
  return QuantileFamily("normal", std::move(q), std::move(pdf), std::move(support), true);
}

[[nodiscard]] inline QuantileFamily standard_normal_family() { return normal_family({1.0}); }

/// Uniform coordinates on [lower_k, upper_k].
[[nodiscard]] inline QuantileFamily uniform_family(std::vector<double> lower,
                                                   std::vector<double> upper) {
  if (lower.empty() || upper.empty()) {
    throw Error(ErrorCode::InvalidArgument, "uniform family needs bounds");
  }
  const std::size_t n = std::max(lower.size(), upper.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (!(detail::extended(lower, k) < detail::extended(upper, k))) {
      throw Error(ErrorCode::InvalidArgument, "uniform family needs lower < upper");
    }
  }
  auto q = [lower, upper](std::size_t k, double u) {
    const double a = detail::extended(lower, k);
    const double b = detail::extended(upper, k);
    return a + (b - a) * u;
  };
  auto pdf = [lower, upper](std::size_t k, double x) {
    const double a = detail::extended(lower, k);
    const double b = detail::extended(upper, k);
    return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
  };
  auto support = [lower, upper](std::size_t k) {
    return std::pair{detail::extended(lower, k), detail::extended(upper, k)};
  };
  return QuantileFamily("uniform", std::move(q), std::move(pdf), std::move(support), false);
}

[[nodiscard]] inline QuantileFamily identity_family() {
  return QuantileFamily(
      "identity", [](std::size_t, double u) { return u; },
      [](std::size_t, double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; },
      [](std::size_t) { return std::pair{0.0, 1.0}; }, false);
}

/// Coordinate k of point n is q_k(u_{n,k}) for the base coordinate u.
[[nodiscard]] inline PointSource pullback_source(const PointSource& base, QuantileFamily family) {
  if (base.codomain() != Codomain::UnitCube) {
    throw Error(ErrorCode::InvalidArgument, "pullback needs a unit-cube base source");
  }
  const bool identity = family.name() == "identity";
  return PointSource(
      SourceKind::Pullback, identity ? Codomain::UnitCube : Codomain::RealLineProduct,
      [base, family = std::move(family)](Index n, std::size_t k) {
        return family.quantile(k, base.coordinate(n, k));
      },
      base.max_rank());
}

}  // namespace diracmean
