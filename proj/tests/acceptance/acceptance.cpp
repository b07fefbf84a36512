// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "config.hpp"
#include "execute.hpp"

#include <diracmean/diracmean.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace dm = diracmean;
namespace cli = diracmean::cli;
namespace fs = std::filesystem;
using Complex = dm::Complex;

namespace {

// Tolerances, pinned.
constexpr double kClassicalTol = 5e-4;
constexpr double kDensityTol = 1e-3;
constexpr double kLimitTol = 1e-3;
constexpr double kFresnelTol = 5e-3;
constexpr double kOracleClosedFormTol = 1e-8;
constexpr double kRouteTol = 1e-2;
constexpr double kScanTol = 2e-2;
constexpr double kGaugeTol = 1e-12;
constexpr double kLinearityTol = 1e-12;
constexpr double kParallelTol = 1e-12;
constexpr double kFastSeconds = 1.0;
constexpr double kFresnelSeconds = 30.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome& out;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      out.pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

dm::RunOptions fixed(std::uint64_t n, std::uint64_t stride = dm::kDefaultTraceStride) {
  dm::RunOptions o;
  o.budget = n;
  o.rule.min_samples = n;
  o.trace_stride = stride;
  return o;
}

double rel(Complex got, Complex want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string fmt(Complex z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6f%+.6fi", z.real(), z.imag());
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("diracmean-acceptance-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

dm::CylinderFunction x_squared() { return dm::first_coordinate_squared(); }

// 1
Outcome classical_recovery() {
  Outcome o;
  Check c{o, {}};
  const auto f = dm::cylinder_function(
      2, [](std::span<const double> x) { return Complex(x[0] * x[1]); }, "x1*x2");
  const auto start = std::chrono::steady_clock::now();
  const auto r = dm::integrate_cylinder(f, dm::halton_source(), dm::constant_policy(), fixed(100000));
  const double t = seconds_since(start);
  const double err = r.final_estimate ? std::abs(*r.final_estimate - 0.25) : INFINITY;
  c.require(err <= kClassicalTol, "|est-0.25| <= 5e-4");
  c.require(t < kFastSeconds, "runtime < 1 s");
  o.detail = "err=" + fmt(err) + " time=" + fmt(t) + "s" + c.note.str();
  return o;
}

// 2
Outcome density_mean() {
  Outcome o;
  Check c{o, {}};
  const double oracle = (1.0 / 2.0 + 1.0 / 3.0) / (1.0 + 1.0 / 2.0);
  const auto phi = dm::density_policy([](std::span<const double> x) { return 1.0 + x[0]; }, 1);
  const auto f = dm::cylinder_function(1, [](std::span<const double> x) { return Complex(x[0]); });
  const auto start = std::chrono::steady_clock::now();
  const auto r = dm::integrate_cylinder(f, dm::halton_source(), phi, fixed(100000));
  const double t = seconds_since(start);
  const double err = r.final_estimate ? std::abs(*r.final_estimate - oracle) : INFINITY;
  c.require(err <= kDensityTol, "|est-5/9| <= 1e-3");
  c.require(t < kFastSeconds, "runtime < 1 s");
  o.detail = "err=" + fmt(err) + " time=" + fmt(t) + "s" + c.note.str();
  return o;
}

// 3
Outcome limit_extension() {
  Outcome o;
  Check c{o, {}};
  const auto f = dm::cylinder_function(1, [](std::span<const double> x) { return Complex(std::cos(x[0])); });
  const auto r = dm::integrate_cylinder(f, dm::convergent_source({0.0}, 0.5), dm::constant_policy(),
                                        fixed(100000));
  const double err = r.final_estimate ? std::abs(*r.final_estimate - 1.0) : INFINITY;
  c.require(err <= kLimitTol, "|est-1| <= 1e-3");
  o.detail = "err=" + fmt(err) + c.note.str();
  return o;
}

dm::OscillatoryOptions fresnel_options(dm::FresnelRoute route) {
  dm::OscillatoryOptions opts;
  opts.run = fixed(1000000, 10000);
  opts.route = route;
  return opts;
}

const Complex kFresnelTarget(0.5, -0.5);

// 4
Outcome fresnel_value(std::optional<Complex>& pullback_estimate) {
  Outcome o;
  Check c{o, {}};
  const auto start = std::chrono::steady_clock::now();
  const auto r = dm::oscillatory_mean(dm::halton_source(1), dm::quadratic_action(1, {1.0}),
                                      dm::gaussian_regularizer({1.0}), x_squared(),
                                      fresnel_options(dm::FresnelRoute::Pullback));
  const double t = seconds_since(start);
  pullback_estimate = r.final_estimate;
  const double err = r.final_estimate ? std::abs(*r.final_estimate - kFresnelTarget) : INFINITY;

  const auto oracle = dm::normalized_expectation(
      [](std::span<const double> x) { return Complex(x[0] * x[0]); },
      [](std::span<const double> x) {
        return std::exp(-0.5 * x[0] * x[0]) * std::exp(Complex(0.0, -0.5 * x[0] * x[0]));
      },
      dm::symmetric_box(1, 8.0));
  const double oracle_gap = std::abs(oracle.value - dm::complex_gaussian_moment(1.0, 1.0, 2));

  c.require(err <= kFresnelTol, "|est-(0.5-0.5i)| <= 5e-3");
  c.require(oracle_gap <= kOracleClosedFormTol, "|oracle-closed form| <= 1e-8");
  c.require(t < kFresnelSeconds, "runtime < 30 s");
  o.detail = "est=" + (r.final_estimate ? fmt(*r.final_estimate) : std::string("degenerate")) +
             " err=" + fmt(err) + " oracle_gap=" + fmt(oracle_gap) + " time=" + fmt(t) + "s" +
             c.note.str();
  return o;
}

// 5
Outcome route_equivalence(const std::optional<Complex>& pullback_estimate) {
  Outcome o;
  Check c{o, {}};
  const auto r = dm::oscillatory_mean(dm::halton_source(1), dm::quadratic_action(1, {1.0}),
                                      dm::gaussian_regularizer({1.0}), x_squared(),
                                      fresnel_options(dm::FresnelRoute::WeightBorne));
  const bool both = r.final_estimate.has_value() && pullback_estimate.has_value();
  const double gap = both ? std::abs(*r.final_estimate - *pullback_estimate) : INFINITY;
  const double err = r.final_estimate ? std::abs(*r.final_estimate - kFresnelTarget) : INFINITY;
  c.require(gap <= kRouteTol, "|weight-borne - pullback| <= 1e-2");
  o.detail = "weight-borne=" + (r.final_estimate ? fmt(*r.final_estimate) : std::string("degenerate")) +
             " gap=" + fmt(gap) + " err_to_target=" + fmt(err) + c.note.str();
  return o;
}

// 6
Outcome sigma_scan() {
  Outcome o;
  Check c{o, {}};
  const auto entries = dm::fresnel_limit_scan(dm::halton_source(1), 1.0, {1.0, 2.0, 4.0},
                                              fresnel_options(dm::FresnelRoute::Pullback));
  std::ostringstream d;
  double previous = INFINITY;
  for (const auto& e : entries) {
    const double s2 = e.sigma * e.sigma;
    const Complex closed = s2 / Complex(1.0, s2);
    if (!e.report.final_estimate) {
      c.require(false, "sigma=" + fmt(e.sigma) + " degenerate");
      continue;
    }
    const double err = std::abs(*e.report.final_estimate - closed);
    const double dist = std::abs(*e.report.final_estimate - Complex(0.0, -1.0));
    c.require(err <= kScanTol, "sigma=" + fmt(e.sigma) + " within 2e-2");
    c.require(dist <= previous, "distance to -i nonincreasing at sigma=" + fmt(e.sigma));
    previous = dist;
    d << " sigma=" << fmt(e.sigma) << ":err=" << fmt(err) << ",dist=" << fmt(dist);
  }
  o.detail = d.str().substr(1) + c.note.str();
  return o;
}

bool finite_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      if (cell.empty()) continue;
      const double v = std::stod(cell);
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

// 7
Outcome degeneracy_guard() {
  Outcome o;
  Check c{o, {}};
  const auto dir = scratch("degenerate");
  cli::ExperimentConfig cfg = cli::parse_config(slurp(fs::path(DIRACMEAN_CONFIG_DIR) / "alternating.json"));
  cfg.output.dir = dir.string();
  std::ostringstream log;
  const int code = cli::execute(cfg, log);
  const auto csv = slurp(dir / cfg.output.trace);
  const auto report = cli::run_experiment(cfg);
  bool finite = true;
  for (const auto& t : report.trace) {
    for (double v : {t.numerator.real(), t.numerator.imag(), t.denominator.real(), t.denominator.imag(),
                     t.den_ratio}) {
      finite = finite && std::isfinite(v);
    }
    if (t.estimate) finite = finite && std::isfinite(t.estimate->real()) && std::isfinite(t.estimate->imag());
  }
  c.require(code == cli::kExitDegenerate, "exit code 2");
  c.require(report.stop_reason == dm::StopReason::Degenerate, "stop_reason degenerate");
  c.require(finite && finite_csv(csv) && csv.find("nan") == std::string::npos &&
                csv.find("inf") == std::string::npos,
            "no NaN/inf in trace");
  o.detail = "exit=" + std::to_string(code) + " trace_points=" + std::to_string(report.trace.size()) +
             c.note.str();
  return o;
}

struct Pairing {
  std::string name;
  dm::PointSource source;
  dm::WeightPolicy policy;
};

std::vector<Pairing> test_matrix() {
  const auto normal = [](const dm::PointSource& base) {
    return dm::pullback_source(base, dm::standard_normal_family());
  };
  const auto s_half = dm::quadratic_action(1, {1.0});
  const auto xi = dm::gaussian_regularizer({1.0});
  const auto density = dm::density_policy([](std::span<const double> x) { return 1.0 + x[0]; }, 1);
  std::vector<Pairing> m;
  const std::vector<std::pair<std::string, dm::PointSource>> cube = {
      {"halton", dm::halton_source()},
      {"weyl", dm::weyl_pi_source(4)},
      {"pseudorandom", dm::pseudorandom_source(7)},
      {"convergent", dm::convergent_source({0.0}, 0.5)},
  };
  for (const auto& [name, src] : cube) {
    m.push_back({name + "/constant", src, dm::constant_policy()});
    m.push_back({name + "/density", src, density});
    m.push_back({name + "/boltzmann", src, dm::boltzmann_policy(s_half)});
  }
  for (const auto& [name, base] : std::vector<std::pair<std::string, dm::PointSource>>{
           {"halton", dm::halton_source(1)}, {"weyl", dm::weyl_pi_source(4, 1)},
           {"pseudorandom", dm::pseudorandom_source(7)}}) {
    m.push_back({name + "-normal/constant", normal(base), dm::constant_policy()});
    m.push_back({name + "-normal/boltzmann", normal(base), dm::boltzmann_policy(s_half)});
    m.push_back({name + "-normal/oscillatory", normal(base), dm::oscillatory_policy(s_half)});
    m.push_back({name + "-uniform/product-regularized",
                 dm::pullback_source(base, dm::uniform_family({-8.0}, {8.0})),
                 dm::product_regularized_policy(xi, s_half)});
  }
  return m;
}

// 8
Outcome gauge_invariance() {
  Outcome o;
  Check c{o, {}};
  const Complex scale = 2.0 * std::exp(Complex(0.0, std::numbers::pi / 3.0));
  double worst = 0.0;
  std::size_t compared = 0;
  for (const auto& p : test_matrix()) {
    const auto a = dm::run(p.source, p.policy, x_squared(), fixed(10000, 1));
    const auto b = dm::run(p.source, p.policy.scaled(scale), x_squared(), fixed(10000, 1));
    if (a.trace.size() != b.trace.size()) {
      c.require(false, p.name + " trace length");
      continue;
    }
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
      if (a.trace[i].estimate.has_value() != b.trace[i].estimate.has_value()) {
        c.require(false, p.name + " degeneracy flag changed");
        break;
      }
      if (!a.trace[i].estimate) continue;
      worst = std::max(worst, rel(*b.trace[i].estimate, *a.trace[i].estimate));
      ++compared;
    }
  }
  c.require(worst <= kGaugeTol, "max relative change <= 1e-12");
  o.detail = "pairings=" + std::to_string(test_matrix().size()) + " partial_estimates=" +
             std::to_string(compared) + " max_rel=" + fmt(worst) + c.note.str();
  return o;
}

// 9
Outcome normalization_linearity() {
  Outcome o;
  Check c{o, {}};
  const Complex value(0.3, -1.7);
  const auto f = x_squared();
  const auto g = dm::cylinder_function(1, [](std::span<const double> x) {
    return Complex(std::cos(3.0 * x[0]), x[0]);
  });
  const auto h = dm::cylinder_function(1, [&](std::span<const double> x) { return 2.0 * f(x) + 3.0 * g(x); });
  std::size_t exact = 0;
  std::size_t pairings = 0;
  double worst = 0.0;
  for (const auto& p : test_matrix()) {
    ++pairings;
    const auto rc = dm::run(p.source, p.policy, dm::constant_function(value), fixed(10000));
    bool all_exact = rc.final_estimate && *rc.final_estimate == value;
    for (const auto& t : rc.trace) all_exact = all_exact && t.estimate && *t.estimate == value;
    exact += all_exact;
    c.require(all_exact, p.name + " f=c not exact");

    const auto rf = dm::run(p.source, p.policy, f, fixed(10000));
    const auto rg = dm::run(p.source, p.policy, g, fixed(10000));
    const auto rh = dm::run(p.source, p.policy, h, fixed(10000));
    if (!rf.final_estimate || !rg.final_estimate || !rh.final_estimate) {
      c.require(false, p.name + " degenerate");
      continue;
    }
    worst = std::max(worst, rel(*rh.final_estimate, 2.0 * *rf.final_estimate + 3.0 * *rg.final_estimate));
  }
  c.require(worst <= kLinearityTol, "linearity within 1e-12 relative");
  o.detail = "exact=" + std::to_string(exact) + "/" + std::to_string(pairings) +
             " linearity_max_rel=" + fmt(worst) + c.note.str();
  return o;
}

// 10
Outcome hierarchy_certification() {
  Outcome o;
  Check c{o, {}};
  const dm::ProjectionHierarchy h123({1, 2, 3});
  const auto halton = dm::hierarchy_certify(dm::halton_source(), h123, 10000, 0.999);
  const auto constant = dm::hierarchy_certify(dm::constant_source(0.3), h123, 10000, 0.999);
  const auto weyl = dm::hierarchy_certify(dm::weyl_pi_source(2), dm::ProjectionHierarchy({1, 2}), 10000, 0.999);
  c.require(halton.pass(), "halton passes ranks 1,2,3");
  bool all_fail = true;
  for (const auto& r : constant.reports) all_fail = all_fail && !r.pass;
  c.require(all_fail, "constant source fails every rank");
  c.require(weyl.pass(), "weyl-pi passes ranks 1,2");
  std::ostringstream d;
  d << "halton:";
  for (const auto& r : halton.reports) d << ' ' << fmt(r.statistic) << "/" << fmt(r.threshold);
  d << " weyl:";
  for (const auto& r : weyl.reports) d << ' ' << fmt(r.statistic) << "/" << fmt(r.threshold);
  d << " constant_pass=" << (constant.pass() ? "yes" : "none");
  o.detail = d.str() + c.note.str();
  return o;
}

// 11
Outcome reproducibility() {
  Outcome o;
  Check c{o, {}};
  auto cfg = cli::parse_config(slurp(fs::path(DIRACMEAN_CONFIG_DIR) / "classical_product.json"));
  for (std::size_t blocks : {1u, 8u}) {
    cfg.blocks = blocks;
    const auto a = scratch("repro-a");
    const auto b = scratch("repro-b");
    std::ostringstream log;
    cfg.output.dir = a.string();
    const int ca = cli::execute(cfg, log);
    cfg.output.dir = b.string();
    const int cb = cli::execute(cfg, log);
    const auto csv_a = slurp(a / cfg.output.trace);
    c.require(ca == cb && !csv_a.empty() && csv_a == slurp(b / cfg.output.trace),
              "bit-identical CSV at blocks=" + std::to_string(blocks));
  }
  cfg.blocks = 1;
  const auto seq = cli::run_experiment(cfg);
  cfg.blocks = 8;
  const auto par = cli::run_experiment(cfg);
  const double gap = (seq.final_estimate && par.final_estimate)
                         ? rel(*par.final_estimate, *seq.final_estimate)
                         : INFINITY;
  c.require(gap <= kParallelTol, "sequential vs 8 blocks within 1e-12 relative");
  o.detail = "seq_vs_8blocks_rel=" + fmt(gap) + c.note.str();
  return o;
}

}  // namespace

int main() {
  std::optional<Complex> pullback;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"classical recovery", classical_recovery},
      {"density-weighted mean", density_mean},
      {"linear extension of the limit", limit_extension},
      {"oscillatory Fresnel value", [&] { return fresnel_value(pullback); }},
      {"Fresnel route equivalence", [&] { return route_equivalence(pullback); }},
      {"sigma-scan trend", sigma_scan},
      {"degeneracy guard", degeneracy_guard},
      {"gauge invariance", gauge_invariance},
      {"normalization and linearity", normalization_linearity},
      {"hierarchy certification", hierarchy_certification},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": " << criteria[i].first
              << "  (" << out.detail << ")" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
