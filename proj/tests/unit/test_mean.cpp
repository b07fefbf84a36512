#include <diracmean/action.hpp>
#include <diracmean/mean.hpp>

#include "test_oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace dm = diracmean;
using Complex = dm::Complex;
using diracmean::testing::relative_error;

namespace {

dm::RunOptions fixed_budget(std::uint64_t n, std::uint64_t stride = 1000) {
  dm::RunOptions o;
  o.budget = n;
  o.rule.min_samples = n;
  o.trace_stride = stride;
  return o;
}

dm::CylinderFunction cos_first() {
  return dm::cylinder_function(1, [](std::span<const double> x) { return Complex(std::cos(x[0])); });
}

}  // namespace

TEST(Accumulate, OnePointBarycenter) {
  const auto acc = dm::accumulate({}, 1.0, 5.0);
  EXPECT_EQ(*dm::estimate(acc), Complex(5.0));
  EXPECT_EQ(acc.count(), 1u);
}

TEST(Accumulate, SymmetricAverage) {
  const auto acc = dm::accumulate(dm::accumulate({}, 1.0, 0.0), 1.0, 1.0);
  EXPECT_EQ(*dm::estimate(acc), Complex(0.5));
}

TEST(Accumulate, ComplexWeights) {
  const auto acc = dm::accumulate(dm::accumulate({}, 1.0, 1.0), Complex(0.0, 1.0), 3.0);
  // (1*1 + i*3) / (1 + i) by hand: (1+3i)(1-i)/2 = (4+2i)/2
  EXPECT_LE(std::abs(*dm::estimate(acc) - Complex(2.0, 1.0)), 1e-15);
}

TEST(Accumulate, RejectsNonFinite) {
  dm::MeanAccumulator acc;
  for (Complex bad : {Complex(NAN, 0.0), Complex(0.0, INFINITY), Complex(-INFINITY, 1.0)}) {
    try {
      acc.accumulate(bad, 1.0);
      ADD_FAILURE();
    } catch (const dm::Error& e) {
      EXPECT_EQ(e.code(), dm::ErrorCode::NonFiniteInput);
    }
    EXPECT_THROW(acc.accumulate(1.0, bad), dm::Error);
  }
  EXPECT_EQ(acc.count(), 0u);
}

TEST(Estimate, ExactCancellationIsDegenerate) {
  const auto acc = dm::accumulate(dm::accumulate({}, 1.0, 2.0), -1.0, 3.0);
  EXPECT_FALSE(dm::estimate(acc).has_value());
  EXPECT_EQ(acc.denominator_ratio(), 0.0);
}

TEST(Estimate, RelativeThreshold) {
  // |den| / sum|alpha| = 1e-9 < 1e-8, at any absolute weight scale.
  for (double scale : {1e-200, 1.0, 1e200}) {
    dm::MeanAccumulator acc;
    acc.accumulate(scale, 1.0);
    acc.accumulate(-scale * (1.0 - 2e-9), 2.0);
    EXPECT_FALSE(dm::estimate(acc).has_value()) << scale;
    EXPECT_TRUE(dm::estimate(acc, 1e-10).has_value()) << scale;
  }
}

TEST(Estimate, QuarterTurnRatio) {
  const auto acc = dm::accumulate(dm::accumulate({}, 1.0, 1.0), Complex(0.0, 1.0), 1.0);
  EXPECT_NEAR(acc.denominator_ratio(), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_TRUE(dm::estimate(acc).has_value());
}

TEST(Estimate, ConstantPolicyNeverDegenerate) {
  dm::MeanAccumulator acc;
  for (int n = 0; n < 1000; ++n) {
    acc.accumulate(1.0, std::sin(n));
    ASSERT_EQ(acc.denominator_ratio(), 1.0);
    ASSERT_TRUE(dm::estimate(acc).has_value());
  }
}

TEST(Estimate, EmptyAccumulator) {
  try {
    (void)dm::estimate(dm::MeanAccumulator{});
    ADD_FAILURE();
  } catch (const dm::Error& e) {
    EXPECT_EQ(e.code(), dm::ErrorCode::EmptyAccumulator);
  }
}

TEST(Merge, SplitMatchesSequential) {
  const auto src = dm::halton_source();
  const auto f = [](double u) { return Complex(std::exp(u), std::sin(3 * u)); };
  const auto w = [](dm::Index n, double u) { return Complex(1.0 + u, 0.5 * std::cos(n * 0.1)); };
  dm::MeanAccumulator seq, lo, hi;
  for (dm::Index n = 0; n < 1000; ++n) {
    const double u = src.coordinate(n, 0);
    seq.accumulate(w(n, u), f(u));
    (n < 500 ? lo : hi).accumulate(w(n, u), f(u));
  }
  EXPECT_LE(relative_error(*dm::estimate(dm::merge(lo, hi)), *dm::estimate(seq)), 1e-12);
  EXPECT_LE(relative_error(*dm::estimate(dm::merge(hi, lo)), *dm::estimate(dm::merge(lo, hi))),
            1e-12);
  EXPECT_EQ(dm::merge(lo, hi).count(), 1000u);
}

TEST(Merge, EmptyIsIdentity) {
  const auto a = dm::accumulate(dm::accumulate({}, 2.0, 1.0), Complex(0, 1), 4.0);
  const auto left = dm::merge({}, a);
  const auto right = dm::merge(a, {});
  for (const auto& m : {left, right}) {
    EXPECT_EQ(m.numerator(), a.numerator());
    EXPECT_EQ(m.denominator(), a.denominator());
    EXPECT_EQ(m.abs_weight_sum(), a.abs_weight_sum());
    EXPECT_EQ(m.count(), a.count());
  }
}

TEST(Merge, UniformValueSurvivesOnlyWhenShared) {
  const auto a = dm::accumulate({}, 1.0, 3.0);
  const auto b = dm::accumulate({}, 2.0, 3.0);
  const auto c = dm::accumulate({}, 2.0, 4.0);
  EXPECT_EQ(dm::merge(a, b).uniform_value(), Complex(3.0));
  EXPECT_FALSE(dm::merge(a, c).uniform_value().has_value());
}

TEST(Run, ConstantFunctionIsExact) {
  for (const auto& src : {dm::halton_source(), dm::pseudorandom_source(1), dm::constant_source(0.2)}) {
    dm::RunOptions o;
    o.budget = 100000;
    const auto r = dm::run(src, dm::constant_policy(), dm::constant_function(1.0), o);
    EXPECT_EQ(*r.final_estimate, Complex(1.0));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.stop_reason, dm::StopReason::WindowCauchy);
    // The first window ends at the 8th trace point.
    EXPECT_EQ(r.n_used, std::max<std::uint64_t>(o.rule.min_samples, o.rule.window * o.trace_stride));
  }
}

TEST(Run, LinearExtensionOfTheLimit) {
  const auto r = dm::run(dm::convergent_source({0.0}, 0.5), dm::constant_policy(), cos_first(),
                         fixed_budget(100000));
  // Brute-force partial sum of cos(2^-n).
  double sum = 0.0;
  for (int n = 0; n < 100000; ++n) sum += std::cos(std::ldexp(1.0, -n));
  const double direct = sum / 100000.0;
  EXPECT_NEAR(r.final_estimate->real(), direct, 1e-12);
  EXPECT_NEAR(r.final_estimate->real(), 1.0, 1e-3);
}

TEST(Run, AlternatingPhaseIsDegenerate) {
  const auto policy = dm::oscillatory_policy(dm::alternating_phase_action());
  dm::RunOptions o;
  o.budget = 100000;
  const auto r = dm::run(dm::halton_source(), policy, cos_first(), o);
  EXPECT_EQ(r.stop_reason, dm::StopReason::Degenerate);
  EXPECT_FALSE(r.converged);
  EXPECT_FALSE(r.final_estimate.has_value());
  EXPECT_EQ(r.trace.size(), o.rule.window);
  for (const auto& t : r.trace) {
    EXPECT_FALSE(t.estimate.has_value());
    EXPECT_TRUE(std::isfinite(t.numerator.real()) && std::isfinite(t.numerator.imag()));
    EXPECT_TRUE(std::isfinite(t.den_ratio));
  }
}

TEST(Run, TraceStrictlyIncreasingAndConvergedImpliesCauchy) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 20; ++trial) {
    dm::RunOptions o;
    o.budget = 1000 + rng() % 30000;
    o.trace_stride = 1 + rng() % 3000;
    o.rule.rel_tol = trial % 2 == 0 ? 1e-2 : 1e-6;
    const auto r = dm::run(dm::halton_source(), dm::constant_policy(), cos_first(), o);
    for (std::size_t i = 1; i < r.trace.size(); ++i) ASSERT_LT(r.trace[i - 1].m, r.trace[i].m);
    if (r.converged) {
      ASSERT_EQ(r.stop_reason, dm::StopReason::WindowCauchy);
    }
    ASSERT_EQ(r.trace.back().m + 1, r.n_used);
    ASSERT_LE(r.n_used, o.budget);
  }
}

TEST(Run, BudgetExhaustedWhenTooShort) {
  dm::RunOptions o;
  o.budget = 3000;
  const auto r = dm::run(dm::halton_source(), dm::constant_policy(), cos_first(), o);
  EXPECT_EQ(r.stop_reason, dm::StopReason::BudgetExhausted);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.n_used, 3000u);
}

TEST(Run, StoppingRuleValidation) {
  dm::RunOptions o;
  o.budget = 10;
  o.rule.window = 1;
  EXPECT_THROW((void)dm::run(dm::halton_source(), dm::constant_policy(), cos_first(), o), dm::Error);
  o.rule.window = 8;
  o.rule.degeneracy_threshold = 1.0;
  EXPECT_THROW((void)dm::run(dm::halton_source(), dm::constant_policy(), cos_first(), o), dm::Error);
}

TEST(Run, BlocksMatchSequential) {
  const auto policy = dm::oscillatory_policy(dm::quadratic_action(1, {1.0}));
  const auto src = dm::pullback_source(dm::halton_source(1), dm::standard_normal_family());
  const auto f = dm::cylinder_function(1, [](std::span<const double> x) { return Complex(x[0] * x[0]); });
  const auto seq = dm::run(src, policy, f, fixed_budget(20000));
  for (std::size_t blocks : {2u, 3u, 8u}) {
    auto o = fixed_budget(20000);
    o.blocks = blocks;
    const auto par = dm::run(src, policy, f, o);
    const auto again = dm::run(src, policy, f, o);
    ASSERT_EQ(par.trace.size(), seq.trace.size());
    for (std::size_t i = 0; i < par.trace.size(); ++i) {
      EXPECT_LE(relative_error(*par.trace[i].estimate, *seq.trace[i].estimate), 1e-12);
      EXPECT_EQ(par.trace[i].numerator, again.trace[i].numerator);
      EXPECT_EQ(par.trace[i].denominator, again.trace[i].denominator);
    }
  }
}

// Properties

TEST(MeanProperties, AccumulatorInvariants) {
  std::mt19937_64 rng(60);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    dm::MeanAccumulator acc;
    const int n = 1 + rng() % 500;
    for (int i = 0; i < n; ++i) {
      acc.accumulate(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
      ASSERT_GE(acc.abs_weight_sum() * (1 + 1e-14), std::abs(acc.denominator()));
    }
    ASSERT_EQ(acc.count(), static_cast<std::uint64_t>(n));
  }
}

TEST(MeanProperties, Normalization) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const auto src = dm::pullback_source(dm::halton_source(1), dm::standard_normal_family());
  const std::vector<dm::WeightPolicy> policies = {
      dm::constant_policy(),
      dm::density_policy([](std::span<const double> x) { return 0.1 + x[0] * x[0]; }, 1),
      dm::boltzmann_policy(dm::quadratic_action(1, {1.0})),
      dm::oscillatory_policy(dm::quadratic_action(1, {1.0})),
  };
  for (const auto& p : policies) {
    for (int trial = 0; trial < 5; ++trial) {
      const Complex c(u(rng), u(rng));
      dm::RunOptions o;
      o.budget = 1 + rng() % 20000;
      o.rule.min_samples = 1;
      o.trace_stride = 1 + rng() % 500;
      const auto r = dm::run(src, p, dm::constant_function(c), o);
      for (const auto& t : r.trace) ASSERT_EQ(*t.estimate, c);
      ASSERT_EQ(*r.final_estimate, c);
    }
  }
}

TEST(MeanProperties, LinearityAtFixedPrefix) {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto src = dm::pullback_source(dm::halton_source(1), dm::standard_normal_family());
  const auto p = dm::oscillatory_policy(dm::quadratic_action(1, {0.7}));
  const auto f = dm::cylinder_function(1, [](std::span<const double> x) { return Complex(x[0] * x[0]); });
  const auto g = dm::cylinder_function(2, [](std::span<const double> x) {
    return Complex(std::cos(x[1]), x[0]);
  });
  for (int trial = 0; trial < 5; ++trial) {
    const Complex a(u(rng), u(rng));
    const Complex b(u(rng), u(rng));
    const auto h = dm::cylinder_function(2, [&](std::span<const double> x) { return a * f(x) + b * g(x); });
    const auto opts = fixed_budget(4000, 1000);
    const auto rf = dm::run(src, p, f, opts);
    const auto rg = dm::run(src, p, g, opts);
    const auto rh = dm::run(src, p, h, opts);
    for (std::size_t i = 0; i < rh.trace.size(); ++i) {
      const Complex combined = a * *rf.trace[i].estimate + b * *rg.trace[i].estimate;
      ASSERT_LE(relative_error(*rh.trace[i].estimate, combined), 1e-12);
    }
  }
}

TEST(MeanProperties, PrefixPermutationInvariance) {
  std::mt19937_64 rng(63);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 10 + rng() % 3000;
    std::vector<std::pair<Complex, Complex>> terms(m);
    for (auto& t : terms) t = {Complex(1.0 + std::abs(g(rng)), g(rng)), Complex(g(rng), g(rng))};
    dm::MeanAccumulator a;
    for (const auto& [w, v] : terms) a.accumulate(w, v);
    std::shuffle(terms.begin(), terms.end(), rng);
    dm::MeanAccumulator b;
    for (const auto& [w, v] : terms) b.accumulate(w, v);
    ASSERT_LE(relative_error(*dm::estimate(b), *dm::estimate(a)), 1e-12);
  }
}

TEST(MeanProperties, DegeneracyNeverLeaksNonFinite) {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 200; ++trial) {
    dm::MeanAccumulator acc;
    const int n = 1 + rng() % 64;
    for (int i = 0; i < n; ++i) {
      const double w = (i % 2 == 0 ? 1.0 : -1.0) * std::ldexp(1.0, static_cast<int>(rng() % 40) - 20);
      acc.accumulate(w, static_cast<double>(rng() % 7));
      const auto e = dm::estimate(acc);
      if (e) {
        ASSERT_TRUE(std::isfinite(e->real()) && std::isfinite(e->imag()));
      }
    }
  }
}
