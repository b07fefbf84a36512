#include "execute.hpp"

#include "registry.hpp"

#include <diracmean/cylinder.hpp>
#include <diracmean/error.hpp>
#include <diracmean/oscillatory.hpp>
#include <diracmean/report_io.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace diracmean::cli {

using nlohmann::json;

namespace {

RunOptions run_options(const ExperimentConfig& c) {
  RunOptions opts;
  opts.budget = c.budget;
  opts.rule.window = c.stopping.window;
  opts.rule.rel_tol = c.stopping.rel_tol;
  opts.rule.min_samples = c.stopping.min_samples;
  opts.rule.degeneracy_threshold = c.stopping.degeneracy_threshold;
  opts.trace_stride = c.trace_stride;
  opts.blocks = c.blocks;
  return opts;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << content;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

int exit_for(const ConvergenceReport& report) {
  if (!report.final_estimate) return kExitDegenerate;
  return report.converged ? kExitOk : kExitNotConverged;
}

bool is_equidistributed_kind(const std::string& kind) {
  return kind == "halton" || kind == "weyl" || kind == "pseudorandom";
}

std::filesystem::path prepare_output(const ExperimentConfig& c) {
  auto dir = output_directory(c);
  std::filesystem::create_directories(dir);
  return dir;
}

int run_estimate(const ExperimentConfig& c, std::ostream& log, bool compare) {
  const auto report = run_experiment(c);
  const auto dir = prepare_output(c);
  {
    std::ostringstream csv;
    write_trace_csv(csv, report);
    write_file(dir / c.output.trace, csv.str());
  }
  json summary = summary_json(report);
  summary["mode"] = std::string(to_string(c.mode));
  int code = exit_for(report);
  if (compare) {
    const auto oracle = oracle_value(c);
    summary["oracle"] = {{"value_re", oracle.value.real()},
                         {"value_im", oracle.value.imag()},
                         {"cells_used", oracle.cells_used}};
    summary["tolerance"] = c.tolerance;
    if (report.final_estimate) {
      const double err = std::abs(*report.final_estimate - oracle.value);
      summary["abs_error"] = err;
      summary["pass"] = err <= c.tolerance;
      code = err <= c.tolerance ? kExitOk : kExitNotConverged;
    } else {
      summary["abs_error"] = nullptr;
      summary["pass"] = false;
      code = kExitDegenerate;
    }
  }
  summary["settings"] = to_json(c);
  write_json(dir / c.output.summary, summary);
  summary.erase("settings");
  log << summary.dump() << '\n';
  return code;
}

int run_certify(const ExperimentConfig& c, std::ostream& log) {
  const auto source = make_base_source(c.source);
  const auto cert = hierarchy_certify(source, ProjectionHierarchy(c.hierarchy), c.budget,
                                      c.significance, c.bins_per_axis);
  json summary = diracmean::to_json(cert);
  summary["mode"] = "certify";
  summary["settings"] = to_json(c);
  write_json(prepare_output(c) / c.output.summary, summary);
  summary.erase("settings");
  log << summary.dump() << '\n';
  return cert.pass() ? kExitOk : kExitCertificationFailed;
}

int run_oracle(const ExperimentConfig& c, std::ostream& log) {
  const auto oracle = oracle_value(c);
  json summary = {{"value_re", oracle.value.real()},
                  {"value_im", oracle.value.imag()},
                  {"cells_used", oracle.cells_used}};
  log << summary.dump() << '\n';
  summary["mode"] = "oracle";
  summary["settings"] = to_json(c);
  write_json(prepare_output(c) / c.output.summary, summary);
  return kExitOk;
}

int run_scan(const ExperimentConfig& c, std::ostream& log) {
  OscillatoryOptions opts;
  opts.run = run_options(c);
  opts.route = make_route(c.policy);
  const auto entries =
      fresnel_limit_scan(make_base_source(c.source), c.scan.curvature, c.scan.sigmas, opts);

  std::ostringstream csv;
  csv << "sigma,re_est,im_est,re_closed,im_closed,N_used,stop_reason\n";
  json rows = json::array();
  int code = kExitOk;
  for (const auto& e : entries) {
    const auto& est = e.report.final_estimate;
    csv << format_double(e.sigma) << ',' << (est ? format_double(est->real()) : "") << ','
        << (est ? format_double(est->imag()) : "") << ',' << format_double(e.closed_form.real())
        << ',' << format_double(e.closed_form.imag()) << ',' << e.report.n_used << ','
        << to_string(e.report.stop_reason) << '\n';
    json row = summary_json(e.report);
    row["sigma"] = e.sigma;
    row["closed_form"] = diracmean::to_json(std::optional<Complex>(e.closed_form));
    rows.push_back(row);
    // Degeneracy outranks non-convergence.
    const int entry_code = exit_for(e.report);
    if (entry_code == kExitDegenerate || code == kExitOk) code = std::max(code, entry_code);
  }
  const auto dir = prepare_output(c);
  write_file(dir / c.output.trace, csv.str());
  json summary = {{"mode", "fresnel-scan"}, {"curvature", c.scan.curvature}, {"entries", rows}};
  log << summary.dump() << '\n';
  summary["settings"] = to_json(c);
  write_json(dir / c.output.summary, summary);
  return code;
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig config, const Overrides& o) {
  if (o.out_dir) config.output.dir = *o.out_dir;
  if (o.budget) config.budget = *o.budget;
  if (o.blocks) config.blocks = *o.blocks;
  if (o.seed) config.source.seed = *o.seed;
  validate(config);
  return config;
}

std::filesystem::path output_directory(const ExperimentConfig& config) {
  if (!config.output.dir.empty()) return config.output.dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return "diracmean-out";
}

ConvergenceReport run_experiment(const ExperimentConfig& c) {
  const auto f = make_function(c.function);
  const auto opts = run_options(c);
  if (c.policy.kind == "fresnel") {
    OscillatoryOptions osc;
    osc.run = opts;
    osc.route = make_route(c.policy);
    return oscillatory_mean(make_base_source(c.source), make_action(c.policy.action),
                            make_regularizer(c.policy), f, osc);
  }
  return integrate_cylinder(f, make_source(c.source), make_policy(c.policy), opts);
}

OracleValue oracle_value(const ExperimentConfig& c) {
  if (!is_equidistributed_kind(c.source.kind)) {
    throw Error(ErrorCode::InvalidArgument,
                "the quadrature oracle needs an equidistributed source (halton, weyl, pseudorandom)");
  }
  if (c.policy.kind != "constant" && c.policy.kind != "density" &&
      c.policy.action.kind == "alternating") {
    throw Error(ErrorCode::InvalidArgument, "index-dependent actions have no quadrature oracle");
  }
  const auto f = make_function(c.function);
  ComplexFn fn = [f](std::span<const double> x) { return f(x); };

  if (c.policy.kind == "fresnel") {
    const auto xi = make_regularizer(c.policy);
    const auto action = make_action(c.policy.action);
    QuadratureSpec spec{xi.rank(), {}, {}, c.oracle_cells};
    for (std::size_t k = 0; k < xi.rank(); ++k) {
      spec.upper.push_back(xi.truncation(k));
      spec.lower.push_back(-xi.truncation(k));
    }
    ComplexFn rho = [xi, action](std::span<const double> x) {
      return xi(x) * unit_phase(action(x));
    };
    return normalized_expectation(fn, rho, spec);
  }

  const auto policy = make_policy(c.policy);
  const auto family = make_pullback(c.source);
  const std::size_t rank = std::max<std::size_t>({1, f.rank(), policy.rank()});
  QuadratureSpec spec{rank, {}, {}, c.oracle_cells};
  for (std::size_t k = 0; k < rank; ++k) {
    auto [lo, hi] = family.support(k);
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      const double w = c.source.widths[std::min(k, c.source.widths.size() - 1)];
      hi = 8.0 * std::max(w, 1.0);
      lo = -hi;
    }
    spec.lower.push_back(lo);
    spec.upper.push_back(hi);
  }
  ComplexFn rho = [family, policy](std::span<const double> x) {
    double pdf = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) pdf *= family.density(k, x[k]);
    return pdf * policy(0, x);
  };
  return normalized_expectation(fn, rho, spec);
}

int execute(const ExperimentConfig& config, std::ostream& log) {
  try {
    switch (config.mode) {
      case Mode::Estimate: return run_estimate(config, log, false);
      case Mode::Compare: return run_estimate(config, log, true);
      case Mode::Certify: return run_certify(config, log);
      case Mode::Oracle: return run_oracle(config, log);
      case Mode::FresnelScan: return run_scan(config, log);
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::DegenerateOracle ? kExitDegenerate : kExitFailure;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace diracmean::cli
