#include "config.hpp"

#include "registry.hpp"

#include <diracmean/error.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <type_traits>

namespace diracmean::cli {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw ConfigError(ConfigError::Kind::Validation, field, message);
}

std::uint64_t as_unsigned(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) invalid(field, "must be non-negative");
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    invalid(field, "must be a non-negative integer");
  }
  invalid(field, "expected a non-negative integer");
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) invalid(field, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) invalid(field, "expected a string");
  return v.get<std::string>();
}

template <class T, class Fn>
std::vector<T> as_list(const json& v, const std::string& field, Fn&& element) {
  if (!v.is_array()) invalid(field, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(element(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void read(const json& v, const std::string& f, std::uint64_t& out) { out = as_unsigned(v, f); }
void read(const json& v, const std::string& f, double& out) { out = as_double(v, f); }
void read(const json& v, const std::string& f, std::string& out) { out = as_string(v, f); }
void read(const json& v, const std::string& f, std::vector<double>& out) {
  out = as_list<double>(v, f, as_double);
}
void read(const json& v, const std::string& f, std::vector<std::string>& out) {
  out = as_list<std::string>(v, f, as_string);
}
void read(const json& v, const std::string& f, std::vector<std::size_t>& out) {
  out = as_list<std::size_t>(v, f, [](const json& e, const std::string& ef) {
    return static_cast<std::size_t>(as_unsigned(e, ef));
  });
}
void read(const json& v, const std::string& f, std::vector<std::vector<double>>& out) {
  out = as_list<std::vector<double>>(v, f, [](const json& e, const std::string& ef) {
    return as_list<double>(e, ef, as_double);
  });
}
static_assert(std::is_same_v<std::size_t, std::uint64_t>, "size_t fields are read as uint64");

/// Reads known keys of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) invalid(path_.empty() ? "<document>" : path_, "expected an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (auto it = obj_.find(key); it != obj_.end() && !it->is_null()) read(*it, field(key), out);
  }

  [[nodiscard]] const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return (it == obj_.end() || it->is_null()) ? nullptr : &*it;
  }

  [[nodiscard]] std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) invalid(field(it.key()), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

FunctionSpec read_function(const json& obj, const std::string& path) {
  FunctionSpec f;
  Section s(obj, path);
  s.get("name", f.name);
  s.get("rank", f.rank);
  s.get("index", f.index);
  s.get("coefficients", f.coefficients);
  s.get("matrix", f.matrix);
  s.get("vector", f.vector);
  s.get("constant", f.constant);
  s.get("widths", f.widths);
  s.get("frequency", f.frequency);
  s.get("value", f.value);
  s.get("value_im", f.value_im);
  s.finish();
  return f;
}

json function_json(const FunctionSpec& f) {
  return {{"name", f.name},         {"rank", f.rank},         {"index", f.index},
          {"coefficients", f.coefficients}, {"matrix", f.matrix}, {"vector", f.vector},
          {"constant", f.constant}, {"widths", f.widths},     {"frequency", f.frequency},
          {"value", f.value},       {"value_im", f.value_im}};
}

const std::set<std::string> kSourceKinds{"halton", "weyl", "pseudorandom", "convergent", "constant"};
const std::set<std::string> kPullbacks{"identity", "normal", "uniform"};
const std::set<std::string> kPolicyKinds{"constant", "density", "boltzmann", "oscillatory",
                                         "fresnel"};
const std::set<std::string> kFunctionNames{"coordinate", "coordinate-product", "polynomial",
                                           "cosine",     "gaussian",           "quadratic-form",
                                           "constant"};
const std::set<std::string> kDensityNames{"polynomial", "quadratic-form", "gaussian"};
const std::set<std::string> kActionKinds{"quadratic", "alternating"};
const std::set<std::string> kRoutes{"pullback", "weight-borne"};

void require_member(const std::set<std::string>& names, const std::string& value,
                    const std::string& field) {
  if (!names.count(value)) invalid(field, "unknown name '" + value + "'");
}

void require_positive(const std::vector<double>& values, const std::string& field) {
  if (values.empty()) invalid(field, "must not be empty");
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid(field, "entries must be positive");
  }
}

void validate_square_symmetric(const std::vector<std::vector<double>>& m,
                               const std::vector<double>& vec, const std::string& field) {
  if (m.empty()) invalid(field + ".matrix", "must not be empty");
  for (const auto& row : m) {
    if (row.size() != m.size()) invalid(field + ".matrix", "must be square");
  }
  if (m.size() > 16) invalid(field + ".matrix", "rank is limited to 16");
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      if (m[i][j] != m[j][i]) invalid(field + ".matrix", "AsymmetricMatrix");
    }
  }
  if (!vec.empty() && vec.size() != m.size()) invalid(field + ".vector", "size must match matrix");
}

void validate_function(const FunctionSpec& f, const std::string& field,
                       const std::set<std::string>& names) {
  require_member(names, f.name, field + ".name");
  if (f.name == "coordinate-product" && f.rank < 1) invalid(field + ".rank", "must be >= 1");
  if (f.name == "polynomial" && f.coefficients.empty()) {
    invalid(field + ".coefficients", "must not be empty");
  }
  if (f.name == "gaussian") require_positive(f.widths, field + ".widths");
  if (f.name == "quadratic-form") validate_square_symmetric(f.matrix, f.vector, field);
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Estimate: return "estimate";
    case Mode::Certify: return "certify";
    case Mode::Oracle: return "oracle";
    case Mode::FresnelScan: return "fresnel-scan";
    case Mode::Compare: return "compare";
  }
  return "estimate";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::Estimate, Mode::Certify, Mode::Oracle, Mode::FresnelScan, Mode::Compare}) {
    if (to_string(m) == name) return m;
  }
  invalid("mode", "unknown mode '" + std::string(name) + "'");
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  Section top(doc, "");
  std::string mode{to_string(c.mode)};
  top.get("mode", mode);
  c.mode = parse_mode(mode);

  if (const json* src = top.child("source")) {
    Section s(*src, "source");
    s.get("kind", c.source.kind);
    s.get("index_offset", c.source.index_offset);
    s.get("seed", c.source.seed);
    s.get("generators", c.source.generators);
    s.get("rank", c.source.rank);
    s.get("target", c.source.target);
    s.get("rate", c.source.rate);
    s.get("displacement", c.source.displacement);
    s.get("value", c.source.value);
    s.get("pullback", c.source.pullback);
    s.get("widths", c.source.widths);
    s.get("lower", c.source.lower);
    s.get("upper", c.source.upper);
    s.finish();
  }

  if (const json* pol = top.child("policy")) {
    Section s(*pol, "policy");
    s.get("kind", c.policy.kind);
    if (const json* d = s.child("density")) c.policy.density = read_function(*d, "policy.density");
    if (const json* a = s.child("action")) {
      Section as(*a, "policy.action");
      as.get("kind", c.policy.action.kind);
      as.get("matrix", c.policy.action.matrix);
      as.get("vector", c.policy.action.vector);
      as.get("constant", c.policy.action.constant);
      as.finish();
    }
    s.get("regularizer_widths", c.policy.regularizer_widths);
    s.get("route", c.policy.route);
    s.finish();
  }

  if (const json* fn = top.child("function")) c.function = read_function(*fn, "function");

  top.get("hierarchy", c.hierarchy);
  top.get("bins_per_axis", c.bins_per_axis);
  top.get("budget", c.budget);

  if (const json* st = top.child("stopping")) {
    Section s(*st, "stopping");
    s.get("window", c.stopping.window);
    s.get("rel_tol", c.stopping.rel_tol);
    s.get("min_samples", c.stopping.min_samples);
    s.get("degeneracy_threshold", c.stopping.degeneracy_threshold);
    s.finish();
  }

  top.get("trace_stride", c.trace_stride);
  top.get("significance", c.significance);
  top.get("blocks", c.blocks);
  top.get("oracle_cells", c.oracle_cells);
  top.get("tolerance", c.tolerance);

  if (const json* sc = top.child("scan")) {
    Section s(*sc, "scan");
    s.get("sigmas", c.scan.sigmas);
    s.get("curvature", c.scan.curvature);
    s.finish();
  }

  if (const json* out = top.child("output")) {
    Section s(*out, "output");
    s.get("dir", c.output.dir);
    s.get("trace", c.output.trace);
    s.get("summary", c.output.summary);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::Parse, "", e.what());
  }
  return config_from_json(doc);
}

json to_json(const ExperimentConfig& c) {
  json policy = {{"kind", c.policy.kind},
                 {"density", c.policy.density ? function_json(*c.policy.density) : json(nullptr)},
                 {"action",
                  {{"kind", c.policy.action.kind},
                   {"matrix", c.policy.action.matrix},
                   {"vector", c.policy.action.vector},
                   {"constant", c.policy.action.constant}}},
                 {"regularizer_widths", c.policy.regularizer_widths},
                 {"route", c.policy.route}};
  return {
      {"mode", std::string(to_string(c.mode))},
      {"source",
       {{"kind", c.source.kind},
        {"index_offset", c.source.index_offset},
        {"seed", c.source.seed},
        {"generators", c.source.generators},
        {"rank", c.source.rank},
        {"target", c.source.target},
        {"rate", c.source.rate},
        {"displacement", c.source.displacement},
        {"value", c.source.value},
        {"pullback", c.source.pullback},
        {"widths", c.source.widths},
        {"lower", c.source.lower},
        {"upper", c.source.upper}}},
      {"policy", policy},
      {"function", function_json(c.function)},
      {"hierarchy", c.hierarchy},
      {"bins_per_axis", c.bins_per_axis},
      {"budget", c.budget},
      {"stopping",
       {{"window", c.stopping.window},
        {"rel_tol", c.stopping.rel_tol},
        {"min_samples", c.stopping.min_samples},
        {"degeneracy_threshold", c.stopping.degeneracy_threshold}}},
      {"trace_stride", c.trace_stride},
      {"significance", c.significance},
      {"blocks", c.blocks},
      {"oracle_cells", c.oracle_cells},
      {"tolerance", c.tolerance},
      {"scan", {{"sigmas", c.scan.sigmas}, {"curvature", c.scan.curvature}}},
      {"output",
       {{"dir", c.output.dir}, {"trace", c.output.trace}, {"summary", c.output.summary}}},
  };
}

void validate(const ExperimentConfig& c) {
  // Source.
  require_member(kSourceKinds, c.source.kind, "source.kind");
  require_member(kPullbacks, c.source.pullback, "source.pullback");
  if (c.source.kind == "weyl") {
    if (c.source.generators.empty()) {
      if (c.source.rank < 1 || c.source.rank > 256) invalid("source.rank", "must lie in 1..256");
    } else {
      for (std::size_t i = 0; i < c.source.generators.size(); ++i) {
        try {
          (void)parse_weyl_generator(c.source.generators[i]);
        } catch (const Error& e) {
          invalid("source.generators[" + std::to_string(i) + "]", e.what());
        }
      }
    }
  }
  if (c.source.kind == "convergent") {
    if (!(c.source.rate > 0.0 && c.source.rate < 1.0)) invalid("source.rate", "must lie in (0,1)");
    if (c.source.target.empty()) invalid("source.target", "must not be empty");
    if (c.source.displacement.empty()) invalid("source.displacement", "must not be empty");
  }
  if (c.source.pullback == "normal") require_positive(c.source.widths, "source.widths");
  if (c.source.pullback == "uniform") {
    if (c.source.lower.empty() || c.source.upper.empty()) {
      invalid("source.lower", "uniform pullback needs lower and upper bounds");
    }
    const auto n = std::max(c.source.lower.size(), c.source.upper.size());
    for (std::size_t k = 0; k < n; ++k) {
      const double lo = c.source.lower[std::min(k, c.source.lower.size() - 1)];
      const double hi = c.source.upper[std::min(k, c.source.upper.size() - 1)];
      if (!(lo < hi)) invalid("source.upper", "must exceed source.lower");
    }
  }
  const bool quasi = c.source.kind == "halton" || c.source.kind == "weyl";
  if (quasi && c.source.pullback == "normal" && c.source.index_offset == 0) {
    invalid("source.index_offset", "must be >= 1 with a normal pullback (point 0 sits at u=0)");
  }

  // Policy.
  require_member(kPolicyKinds, c.policy.kind, "policy.kind");
  require_member(kActionKinds, c.policy.action.kind, "policy.action.kind");
  if (c.policy.action.kind == "quadratic") {
    validate_square_symmetric(c.policy.action.matrix, c.policy.action.vector, "policy.action");
  }
  if (c.policy.kind == "density") {
    if (!c.policy.density) invalid("policy.density", "density policy needs a payload function");
    validate_function(*c.policy.density, "policy.density", kDensityNames);
  }
  if (c.policy.kind == "fresnel") {
    require_member(kRoutes, c.policy.route, "policy.route");
    require_positive(c.policy.regularizer_widths, "policy.regularizer_widths");
    const auto xi_rank = c.policy.regularizer_widths.size();
    if (c.source.pullback != "identity") {
      invalid("source.pullback", "fresnel policies pull back through the regularizer; use identity");
    }
    if (action_rank(c.policy.action) > xi_rank) {
      invalid("policy.action.matrix", "action rank exceeds regularizer rank");
    }
    if (function_rank(c.function) > xi_rank) {
      invalid("function", "function rank exceeds regularizer rank");
    }
    if (quasi && c.policy.route == "pullback" && c.source.index_offset == 0) {
      invalid("source.index_offset", "must be >= 1 on the pullback route (point 0 sits at u=0)");
    }
  }

  // Function.
  validate_function(c.function, "function", kFunctionNames);

  // Run settings.
  if (c.budget < 1) invalid("budget", "must be positive");
  if (c.budget < c.stopping.min_samples) {
    invalid("budget", "budget " + std::to_string(c.budget) + " < stopping.min_samples " +
                          std::to_string(c.stopping.min_samples));
  }
  if (c.stopping.window < 2) invalid("stopping.window", "must be >= 2");
  if (!(c.stopping.rel_tol > 0.0)) invalid("stopping.rel_tol", "must be positive");
  if (!(c.stopping.degeneracy_threshold > 0.0 && c.stopping.degeneracy_threshold < 1.0)) {
    invalid("stopping.degeneracy_threshold", "must lie in (0,1)");
  }
  if (c.trace_stride < 1) invalid("trace_stride", "must be >= 1");
  if (c.blocks < 1) invalid("blocks", "must be >= 1");
  if (!(c.significance > 0.0 && c.significance < 1.0)) invalid("significance", "must lie in (0,1)");
  if (c.oracle_cells < 4) invalid("oracle_cells", "must be >= 4");
  if (!(c.tolerance > 0.0)) invalid("tolerance", "must be positive");

  if (c.hierarchy.empty()) invalid("hierarchy", "must not be empty");
  for (std::size_t i = 0; i < c.hierarchy.size(); ++i) {
    if (c.hierarchy[i] < 1 || (i > 0 && c.hierarchy[i] <= c.hierarchy[i - 1])) {
      invalid("hierarchy", "ranks must be >= 1 and strictly increasing");
    }
  }
  if (c.bins_per_axis.size() > 1 && c.bins_per_axis.size() != c.hierarchy.size()) {
    invalid("bins_per_axis", "needs one entry, or one per hierarchy rank");
  }
  for (auto b : c.bins_per_axis) {
    if (b < 2) invalid("bins_per_axis", "entries must be >= 2");
  }
  if (c.mode == Mode::Certify && c.source.pullback != "identity") {
    invalid("source.pullback", "certify mode needs unit-cube points (identity pullback)");
  }

  require_positive(c.scan.sigmas, "scan.sigmas");
  for (std::size_t i = 1; i < c.scan.sigmas.size(); ++i) {
    if (!(c.scan.sigmas[i] > c.scan.sigmas[i - 1])) invalid("scan.sigmas", "must be increasing");
  }
  if (c.scan.curvature == 0.0 || !std::isfinite(c.scan.curvature)) {
    invalid("scan.curvature", "must be nonzero");
  }
  if (c.mode == Mode::FresnelScan && c.source.pullback != "identity") {
    invalid("source.pullback", "fresnel-scan pulls back through the regularizer; use identity");
  }
  if (c.mode == Mode::FresnelScan && quasi && c.source.index_offset == 0) {
    invalid("source.index_offset", "must be >= 1 for fresnel-scan (point 0 sits at u=0)");
  }
}

}  // namespace diracmean::cli
