#pragma once

// CSV traces and JSON summaries of convergence reports.

#include "diracmean/cylinder.hpp"
#include "diracmean/mean.hpp"

#include <json.hpp>

#include <charconv>
#include <ostream>
#include <string>
#include <system_error>

namespace diracmean {

inline constexpr std::string_view kTraceCsvHeader =
    "m,re_num,im_num,re_den,im_den,re_est,im_est,den_ratio";

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error(ErrorCode::InvalidArgument, "unformattable double");
  return {buf, end};
}

/// One row per trace point. Degenerate rows leave re_est and im_est empty.
inline void write_trace_csv(std::ostream& out, const ConvergenceReport& report) {
  out << kTraceCsvHeader << '\n';
  for (const auto& p : report.trace) {
    out << p.m << ',' << format_double(p.numerator.real()) << ','
        << format_double(p.numerator.imag()) << ',' << format_double(p.denominator.real()) << ','
        << format_double(p.denominator.imag()) << ',';
    if (p.estimate) {
      out << format_double(p.estimate->real()) << ',' << format_double(p.estimate->imag());
    } else {
      out << ',';
    }
    out << ',' << format_double(p.den_ratio) << '\n';
  }
}

[[nodiscard]] inline nlohmann::json to_json(const std::optional<Complex>& z) {
  if (!z) return nullptr;
  return {{"re", z->real()}, {"im", z->imag()}};
}

[[nodiscard]] inline nlohmann::json summary_json(const ConvergenceReport& report) {
  return {{"final_estimate", to_json(report.final_estimate)},
          {"degenerate", !report.final_estimate.has_value()},
          {"converged", report.converged},
          {"stop_reason", std::string(to_string(report.stop_reason))},
          {"N_used", report.n_used}};
}

[[nodiscard]] inline nlohmann::json to_json(const EquidistributionReport& r) {
  return {{"rank", r.rank},           {"sample_count", r.sample_count},
          {"bins_per_axis", r.bins_per_axis}, {"statistic", r.statistic},
          {"threshold", r.threshold}, {"pass", r.pass}};
}

[[nodiscard]] inline nlohmann::json to_json(const HierarchyCertificate& cert) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& r : cert.reports) levels.push_back(to_json(r));
  return {{"pass", cert.pass()}, {"levels", levels}};
}

}  // namespace diracmean
