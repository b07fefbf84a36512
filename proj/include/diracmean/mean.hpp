#pragma once

// Dirac-mean engine: streaming, self-normalized barycenters
//
//   tau_m(f) = sum_{n<=m} alpha_n f(x_n) / sum_{n<=m} alpha_n
//
// with compensated running sums, a relative degeneracy guard on the
// denominator, a window-Cauchy stopping rule, and a block-parallel mode whose
// merge order is fixed so results do not depend on thread timing.

#include "diracmean/cylinder_function.hpp"
#include "diracmean/error.hpp"
#include "diracmean/seq.hpp"
#include "diracmean/weights.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace diracmean {

/// Neumaier-compensated sum of doubles.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.carry_);
  }

  [[nodiscard]] double value() const noexcept { return sum_ + carry_; }
  [[nodiscard]] double sum() const noexcept { return sum_; }
  [[nodiscard]] double carry() const noexcept { return carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(Complex z) noexcept {
    re_.add(z.real());
    im_.add(z.imag());
  }
  void merge(const CompensatedComplexSum& other) noexcept {
    re_.merge(other.re_);
    im_.merge(other.im_);
  }
  [[nodiscard]] Complex value() const noexcept { return {re_.value(), im_.value()}; }
  [[nodiscard]] Complex carry() const noexcept { return {re_.carry(), im_.carry()}; }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

inline constexpr double kDefaultDegeneracyThreshold = 1e-8;

/// Running numerator sum alpha_n v_n, denominator sum alpha_n and sum |alpha_n|.
class MeanAccumulator {
 public:
  void accumulate(Complex alpha, Complex value) {
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()) ||
        !std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw Error(ErrorCode::NonFiniteInput, "non-finite weight or value at count " +
                                                 std::to_string(count_));
    }
    numerator_.add(alpha * value);
    denominator_.add(alpha);
    abs_weight_sum_.add(std::abs(alpha));
    note_value(value);
    ++count_;
  }

  void merge(const MeanAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    numerator_.merge(other.numerator_);
    denominator_.merge(other.denominator_);
    abs_weight_sum_.merge(other.abs_weight_sum_);
    if (other.mixed_values_ || common_value_ != other.common_value_) mixed_values_ = true;
    count_ += other.count_;
  }

  [[nodiscard]] Complex numerator() const noexcept { return numerator_.value(); }
  [[nodiscard]] Complex denominator() const noexcept { return denominator_.value(); }
  [[nodiscard]] double abs_weight_sum() const noexcept { return abs_weight_sum_.value(); }
  [[nodiscard]] Complex numerator_compensation() const noexcept { return numerator_.carry(); }
  [[nodiscard]] Complex denominator_compensation() const noexcept { return denominator_.carry(); }
  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }

  /// |denominator| / sum |alpha|, or 0 when every weight vanished.
  [[nodiscard]] double denominator_ratio() const noexcept {
    const double total = abs_weight_sum();
    return total > 0.0 ? std::abs(denominator()) / total : 0.0;
  }

  /// The common value when every accumulated value was identical.
  [[nodiscard]] std::optional<Complex> uniform_value() const noexcept {
    if (count_ == 0 || mixed_values_) return std::nullopt;
    return common_value_;
  }

 private:
  void note_value(Complex value) noexcept {
    if (count_ == 0) {
      common_value_ = value;
    } else if (value != common_value_) {
      mixed_values_ = true;
    }
  }

  CompensatedComplexSum numerator_;
  CompensatedComplexSum denominator_;
  CompensatedSum abs_weight_sum_;
  std::uint64_t count_ = 0;
  Complex common_value_{};
  bool mixed_values_ = false;
};

[[nodiscard]] inline MeanAccumulator accumulate(MeanAccumulator acc, Complex alpha, Complex value) {
  acc.accumulate(alpha, value);
  return acc;
}

[[nodiscard]] inline MeanAccumulator merge(MeanAccumulator a, const MeanAccumulator& b) {
  a.merge(b);
  return a;
}

/// numerator / denominator, or nullopt (degenerate) when
/// |denominator| < delta * sum |alpha|. Never produces NaN or infinity.
[[nodiscard]] inline std::optional<Complex> estimate(
    const MeanAccumulator& acc, double degeneracy_threshold = kDefaultDegeneracyThreshold) {
  if (acc.count() == 0) throw Error(ErrorCode::EmptyAccumulator, "estimate of an empty accumulator");
  const Complex den = acc.denominator();
  const double den_abs = std::abs(den);
  if (!(den_abs > 0.0) || den_abs < degeneracy_threshold * acc.abs_weight_sum()) {
    return std::nullopt;
  }
  // A barycenter of identical values is that value; skip the rounding of the ratio.
  if (auto v = acc.uniform_value()) return *v;
  const Complex value = acc.numerator() / den;
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) return std::nullopt;
  return value;
}

// ---------------------------------------------------------------------------
// Finite-budget iteration
// ---------------------------------------------------------------------------

struct StoppingRule {
  std::size_t window = 8;
  double rel_tol = 1e-4;
  std::uint64_t min_samples = 1000;
  double degeneracy_threshold = kDefaultDegeneracyThreshold;

  void validate() const {
    if (window < 2) throw Error(ErrorCode::InvalidArgument, "stopping window must be >= 2");
    if (!(rel_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be positive");
    if (!(degeneracy_threshold > 0.0 && degeneracy_threshold < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "degeneracy threshold must lie in (0,1)");
    }
  }

  bool operator==(const StoppingRule&) const = default;
};

inline constexpr std::uint64_t kDefaultTraceStride = 1000;

enum class StopReason { WindowCauchy, BudgetExhausted, Degenerate };

[[nodiscard]] constexpr std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::WindowCauchy: return "window-cauchy";
    case StopReason::BudgetExhausted: return "budget-exhausted";
    case StopReason::Degenerate: return "degenerate";
  }
  return "unknown";
}

struct TracePoint {
  std::uint64_t m = 0;  // index of the last accumulated term (count - 1)
  Complex numerator;
  Complex denominator;
  std::optional<Complex> estimate;
  double den_ratio = 0.0;
};

struct ConvergenceReport {
  std::vector<TracePoint> trace;
  std::optional<Complex> final_estimate;
  bool converged = false;
  StopReason stop_reason = StopReason::BudgetExhausted;
  std::uint64_t n_used = 0;
};

struct RunOptions {
  std::uint64_t budget = 0;
  StoppingRule rule;
  std::uint64_t trace_stride = kDefaultTraceStride;
  /// Number of index blocks evaluated concurrently per trace segment; 1 is sequential.
  std::size_t blocks = 1;
};

namespace detail {

inline void accumulate_range(MeanAccumulator& acc, const PointSource& source,
                             const WeightPolicy& policy, const CylinderFunction& f,
                             std::size_t rank, Index begin, Index end) {
  std::vector<double> x(rank);
  for (Index n = begin; n < end; ++n) {
    source.fill(n, x);
    const Complex alpha = policy(n, x);
    acc.accumulate(alpha, f(x));
  }
}

/// Merges parts pairwise, level by level: ((0,1),(2,3)),... The order depends
/// only on parts.size().
inline MeanAccumulator tree_merge(std::vector<MeanAccumulator> parts) {
  if (parts.empty()) return {};
  while (parts.size() > 1) {
    std::vector<MeanAccumulator> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(merge(parts[i], parts[i + 1]));
    if (parts.size() % 2 == 1) next.push_back(parts.back());
    parts = std::move(next);
  }
  return parts.front();
}

inline MeanAccumulator accumulate_blocks(const PointSource& source, const WeightPolicy& policy,
                                         const CylinderFunction& f, std::size_t rank, Index begin,
                                         Index end, std::size_t blocks) {
  const Index length = end - begin;
  std::vector<std::future<MeanAccumulator>> futures;
  futures.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    const Index lo = begin + length * b / blocks;
    const Index hi = begin + length * (b + 1) / blocks;
    futures.push_back(std::async(std::launch::async, [&, lo, hi] {
      MeanAccumulator part;
      accumulate_range(part, source, policy, f, rank, lo, hi);
      return part;
    }));
  }
  std::vector<MeanAccumulator> parts;
  parts.reserve(blocks);
  for (auto& fut : futures) parts.push_back(fut.get());
  return tree_merge(std::move(parts));
}

inline bool window_cauchy(const std::vector<TracePoint>& trace, std::size_t window, double rel_tol) {
  if (trace.size() < window) return false;
  const auto first = trace.end() - static_cast<std::ptrdiff_t>(window);
  for (auto it = first; it != trace.end(); ++it) {
    if (!it->estimate) return false;
  }
  const double scale = rel_tol * (1.0 + std::abs(*trace.back().estimate));
  for (auto i = first; i != trace.end(); ++i) {
    for (auto j = i + 1; j != trace.end(); ++j) {
      if (std::abs(*i->estimate - *j->estimate) > scale) return false;
    }
  }
  return true;
}

inline bool persistent_degeneracy(const std::vector<TracePoint>& trace, std::size_t window) {
  if (trace.size() < window) return false;
  return std::all_of(trace.end() - static_cast<std::ptrdiff_t>(window), trace.end(),
                     [](const TracePoint& p) { return !p.estimate; });
}

}  // namespace detail

/// Accumulates alpha_n f(x_n) for n = 0..budget-1, recording a trace point
/// every trace_stride samples. Stops early when the last `window` recorded
/// estimates are pairwise within rel_tol * (1 + |last|) (once min_samples
/// is reached) or when the last `window` trace points are all degenerate.
[[nodiscard]] inline ConvergenceReport run(const PointSource& source, const WeightPolicy& policy,
                                           const CylinderFunction& f, const RunOptions& options) {
  options.rule.validate();
  if (options.budget < 1) throw Error(ErrorCode::InvalidArgument, "budget must be positive");
  if (options.trace_stride < 1) throw Error(ErrorCode::InvalidArgument, "trace stride must be >= 1");
  if (options.blocks < 1) throw Error(ErrorCode::InvalidArgument, "blocks must be >= 1");
  const std::size_t rank = std::max(f.rank(), policy.rank());

  ConvergenceReport report;
  MeanAccumulator acc;
  const double delta = options.rule.degeneracy_threshold;
  Index done = 0;
  while (done < options.budget) {
    const Index end = std::min(done + options.trace_stride, options.budget);
    if (options.blocks == 1) {
      detail::accumulate_range(acc, source, policy, f, rank, done, end);
    } else {
      acc.merge(detail::accumulate_blocks(source, policy, f, rank, done, end, options.blocks));
    }
    done = end;

    TracePoint point;
    point.m = acc.count() - 1;
    point.numerator = acc.numerator();
    point.denominator = acc.denominator();
    point.estimate = estimate(acc, delta);
    point.den_ratio = acc.denominator_ratio();
    report.trace.push_back(point);

    if (done >= options.rule.min_samples &&
        detail::window_cauchy(report.trace, options.rule.window, options.rule.rel_tol)) {
      report.converged = true;
      report.stop_reason = StopReason::WindowCauchy;
      break;
    }
    if (detail::persistent_degeneracy(report.trace, options.rule.window)) {
      report.stop_reason = StopReason::Degenerate;
      break;
    }
  }
  report.n_used = acc.count();
  report.final_estimate = estimate(acc, delta);
  if (!report.final_estimate) {
    report.converged = false;
    report.stop_reason = StopReason::Degenerate;
  }
  return report;
}

}  // namespace diracmean
