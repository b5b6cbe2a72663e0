#pragma once

// Configuration-driven experiment runner and report writer.
//
// Config files are flat `key = value` text with dotted namespaces; `#`
// starts a comment line. Reports are a table of named numeric columns, a
// few summary scalars and one record per asserted inequality (its value,
// threshold and outcome).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fraclap/analysis.hpp"
#include "fraclap/domain.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/extension.hpp"
#include "fraclap/operators.hpp"

namespace fraclap::experiment {

inline constexpr const char* kVersion = "fraclap 1.0.0";

enum class ExperimentKind { spectra, positivity, monotonicity, extension, sobolev, sweep };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::spectra:
      return "spectra";
    case ExperimentKind::positivity:
      return "positivity";
    case ExperimentKind::monotonicity:
      return "monotonicity";
    case ExperimentKind::extension:
      return "extension";
    case ExperimentKind::sobolev:
      return "sobolev";
    case ExperimentKind::sweep:
      return "sweep";
  }
  return "?";
}

inline ExperimentKind parse_kind(std::string_view name) {
  for (auto k : {ExperimentKind::spectra, ExperimentKind::positivity, ExperimentKind::monotonicity,
                 ExperimentKind::extension, ExperimentKind::sobolev, ExperimentKind::sweep})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

/// Invalid configuration; what() lists every violated field, one per line.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::vector<std::string>& problems)
      : std::invalid_argument(join(problems)), problems_(problems) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out = "invalid configuration:";
    for (const auto& line : p) out += "\n  " + line;
    return out;
  }
  std::vector<std::string> problems_;
};

struct Tolerances {
  double psd = 1e-10;
  double strict = 1e-9;
  double positivity = 1e-8;
  double chain = 1e-10;
  double extension_gap = 0.05;
  double ordering = 1e-8;
  double trace = 0.15;
  double sobolev = 0.10;
  double navier_sobolev = 0.15;
  double final_ratio = 0.0;  // 0 disables the final-ratio assertion
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::spectra;
  std::uint64_t seed = 0;
  std::string shape;
  int dim = 1;
  double box_halfwidth = 1.0;
  int box_nodes = 127;
  std::vector<double> s_values;
  std::vector<double> alphas;
  int trials = 20;
  double ext_height = 0.0;   // 0: 8·diam(Ω)
  int ext_cells = 64;
  double ext_grading = 0.0;  // 0: max(2, 1/(1−s))
  double sobolev_halfwidth = 40.0;
  int sobolev_nodes = 2047;
  int sobolev_max_iter = 500;
  double sobolev_tol = 1e-10;
  double sweep_box_factor = 4.0;
  std::string outer_shape;
  Tolerances tol;
  std::string output_dir;
  /// Every key with its effective value, as echoed in reports.
  std::map<std::string, std::string> entries;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::map<std::string, std::string> default_entries(ExperimentKind kind, int dim) {
  std::string s_default = "0.25,0.5,0.75";
  if (kind == ExperimentKind::spectra) s_default = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  if (kind == ExperimentKind::sobolev) s_default = "0.25";
  if (kind == ExperimentKind::sweep) s_default = "0.5";
  return {
      {"experiment", to_string(kind)},
      {"dim", std::to_string(dim)},
      {"box.halfwidth", "1"},
      {"box.nodes", dim == 1 ? "127" : "31"},
      {"s", s_default},
      {"alpha", kind == ExperimentKind::sobolev ? "1,2,4,8" : "1,2,4,8,16"},
      {"trials", "20"},
      {"extension.Y", "auto"},
      {"extension.M", "64"},
      {"extension.gamma", "auto"},
      {"sobolev.halfwidth", dim == 1 ? "40" : "10"},
      {"sobolev.nodes", dim == 1 ? "2047" : "127"},
      {"sobolev.max_iter", "500"},
      {"sobolev.tol", "1e-10"},
      {"sweep.box_factor", "4"},
      {"monotonicity.outer_shape", ""},
      {"tolerance.psd", "1e-10"},
      {"tolerance.strict", "1e-9"},
      {"tolerance.positivity", "1e-8"},
      {"tolerance.chain", "1e-10"},
      {"tolerance.extension_gap", "0.05"},
      {"tolerance.ordering", "1e-8"},
      {"tolerance.trace", "0.15"},
      {"tolerance.sobolev", "0.1"},
      {"tolerance.navier_sobolev", "0.15"},
      {"tolerance.final_ratio", "none"},
      {"output.dir", ""},
  };
}

class FieldReader {
 public:
  explicit FieldReader(const std::map<std::string, std::string>& entries) : e_(entries) {}

  std::vector<std::string> problems;

  double number(const std::string& key) {
    const std::string& v = e_.at(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used == v.size() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    problems.push_back(key + ": expected a number, got '" + v + "'");
    return 0.0;
  }

  long long integer(const std::string& key) {
    const std::string& v = e_.at(key);
    try {
      std::size_t used = 0;
      const long long d = std::stoll(v, &used);
      if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    problems.push_back(key + ": expected an integer, got '" + v + "'");
    return 0;
  }

  std::vector<double> list(const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(e_.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        std::size_t used = 0;
        const double d = std::stod(item, &used);
        if (used == item.size() && std::isfinite(d)) {
          out.push_back(d);
          continue;
        }
      } catch (const std::exception&) {
      }
      problems.push_back(key + ": bad list entry '" + item + "'");
    }
    if (out.empty()) problems.push_back(key + ": list must not be empty");
    return out;
  }

  double auto_or_number(const std::string& key) { return e_.at(key) == "auto" ? 0.0 : number(key); }

  void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) problems.push_back(key + ": " + what + " (got '" + e_.at(key) + "')");
  }

 private:
  const std::map<std::string, std::string>& e_;
};

}  // namespace detail

/// Parses and validates a config. `kind` is the subcommand; an `experiment`
/// key in the file must agree with it.
inline ExperimentConfig parse_config(std::string_view text, ExperimentKind kind) {
  std::vector<std::string> problems;
  std::map<std::string, std::string> given;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
      continue;
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) {
      problems.push_back("line " + std::to_string(lineno) + ": empty key");
    } else if (!given.emplace(key, value).second) {
      problems.push_back(key + ": duplicate key");
    }
  }

  for (const char* required : {"seed", "shape"})
    if (!given.count(required)) problems.push_back(std::string(required) + ": missing required key");

  domain::Shape shape;
  int dim = 1;
  if (given.count("shape")) {
    try {
      shape = domain::parse_shape(given.at("shape"));
      dim = shape.dim();
    } catch (const std::invalid_argument& e) {
      problems.push_back(std::string("shape: ") + e.what());
    }
  }

  std::map<std::string, std::string> entries = detail::default_entries(kind, dim);
  for (const auto& [key, value] : given) {
    if (key == "seed" || key == "shape") continue;
    if (!entries.count(key)) {
      problems.push_back(key + ": unknown key");
      continue;
    }
    entries[key] = value;
  }
  entries["seed"] = given.count("seed") ? given.at("seed") : "0";
  entries["shape"] = given.count("shape") ? given.at("shape") : "";
  if (!problems.empty()) throw ConfigError(problems);

  ExperimentConfig c;
  c.kind = kind;
  detail::FieldReader r(entries);
  if (entries["experiment"] != to_string(kind)) {
    r.problems.push_back("experiment: '" + entries["experiment"] + "' does not match the subcommand '" + to_string(kind) + "'");
  }
  const long long seed = r.integer("seed");
  r.require(seed >= 0, "seed", "must be a nonnegative integer");
  c.seed = static_cast<std::uint64_t>(seed);
  c.shape = entries["shape"];
  c.dim = static_cast<int>(r.integer("dim"));
  r.require(c.dim == dim, "dim", "must match the shape dimension " + std::to_string(dim));
  c.box_halfwidth = r.number("box.halfwidth");
  r.require(c.box_halfwidth > 0.0, "box.halfwidth", "must be positive");
  c.box_nodes = static_cast<int>(r.integer("box.nodes"));
  r.require(c.box_nodes >= 1 && c.box_nodes <= (dim == 1 ? 16383 : 63), "box.nodes",
            dim == 1 ? "must lie in [1, 16383]" : "must lie in [1, 63] in 2D");
  if (shape.kind != domain::ShapeKind::custom && c.box_halfwidth > 0.0) {
    r.require(shape.reach() <= c.box_halfwidth * (1.0 + 1e-12), "shape", "exceeds the box halfwidth");
  }

  c.s_values = r.list("s");
  for (double s : c.s_values) {
    if (!(s > 0.0 && s <= 1.0)) r.problems.push_back("s: value " + detail::format_double(s) + " outside (0, 1]");
    if ((kind == ExperimentKind::extension) && s >= 1.0) r.problems.push_back("s: extension experiments need s < 1");
    if (kind == ExperimentKind::sobolev && !(s < 0.5 * dim && s < 1.0)) {
      r.problems.push_back("s: sobolev experiments need s < min(1, dim/2), got " + detail::format_double(s));
    }
  }
  c.alphas = r.list("alpha");
  for (std::size_t k = 0; k < c.alphas.size(); ++k) {
    if (!(c.alphas[k] >= 1.0)) r.problems.push_back("alpha: values must be >= 1");
    if (k > 0 && !(c.alphas[k] > c.alphas[k - 1])) r.problems.push_back("alpha: values must be increasing");
  }
  c.trials = static_cast<int>(r.integer("trials"));
  r.require(c.trials >= 1, "trials", "must be >= 1");
  c.ext_height = r.auto_or_number("extension.Y");
  r.require(entries["extension.Y"] == "auto" || c.ext_height > 0.0, "extension.Y", "must be positive or 'auto'");
  c.ext_cells = static_cast<int>(r.integer("extension.M"));
  r.require(c.ext_cells >= 4 && c.ext_cells <= 4096, "extension.M", "must lie in [4, 4096]");
  c.ext_grading = r.auto_or_number("extension.gamma");
  r.require(entries["extension.gamma"] == "auto" || c.ext_grading >= 1.0, "extension.gamma", "must be >= 1 or 'auto'");
  c.sobolev_halfwidth = r.number("sobolev.halfwidth");
  r.require(c.sobolev_halfwidth > 0.0, "sobolev.halfwidth", "must be positive");
  c.sobolev_nodes = static_cast<int>(r.integer("sobolev.nodes"));
  r.require(c.sobolev_nodes >= 3 && c.sobolev_nodes <= (dim == 1 ? 8191 : 255), "sobolev.nodes",
            dim == 1 ? "must lie in [3, 8191]" : "must lie in [3, 255] in 2D");
  c.sobolev_max_iter = static_cast<int>(r.integer("sobolev.max_iter"));
  r.require(c.sobolev_max_iter >= 1, "sobolev.max_iter", "must be >= 1");
  c.sobolev_tol = r.number("sobolev.tol");
  r.require(c.sobolev_tol > 0.0, "sobolev.tol", "must be positive");
  c.sweep_box_factor = r.number("sweep.box_factor");
  r.require(c.sweep_box_factor >= 1.0, "sweep.box_factor", "must be >= 1");
  c.outer_shape = entries["monotonicity.outer_shape"];
  if (!c.outer_shape.empty()) {
    try {
      const auto outer = domain::parse_shape(c.outer_shape);
      r.require(outer.dim() == dim, "monotonicity.outer_shape", "dimension differs from shape");
    } catch (const std::invalid_argument& e) {
      r.problems.push_back(std::string("monotonicity.outer_shape: ") + e.what());
    }
  }

  auto tolerance = [&](const std::string& key) {
    const double v = r.number(key);
    r.require(v >= 0.0, key, "must be nonnegative");
    return v;
  };
  c.tol.psd = tolerance("tolerance.psd");
  c.tol.strict = tolerance("tolerance.strict");
  c.tol.positivity = tolerance("tolerance.positivity");
  c.tol.chain = tolerance("tolerance.chain");
  c.tol.extension_gap = tolerance("tolerance.extension_gap");
  c.tol.ordering = tolerance("tolerance.ordering");
  c.tol.trace = tolerance("tolerance.trace");
  c.tol.sobolev = tolerance("tolerance.sobolev");
  c.tol.navier_sobolev = tolerance("tolerance.navier_sobolev");
  if (entries["tolerance.final_ratio"] != "none") {
    c.tol.final_ratio = r.number("tolerance.final_ratio");
    r.require(c.tol.final_ratio >= 1.0, "tolerance.final_ratio", "must be >= 1 or 'none'");
  }
  c.output_dir = entries["output.dir"];
  if (!r.problems.empty()) throw ConfigError(r.problems);
  c.entries = std::move(entries);
  return c;
}

/// Canonical text form; parse_config(to_text(c), c.kind) reproduces c.
inline std::string to_text(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [key, value] : c.entries) out += key + " = " + value + "\n";
  return out;
}

struct Assertion {
  std::string name;
  std::string relation;  // "ge", "gt", "le", "lt"
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline Assertion make_assertion(std::string name, double value, std::string relation, double threshold) {
  bool pass = false;
  if (relation == "ge") pass = value >= threshold;
  else if (relation == "gt") pass = value > threshold;
  else if (relation == "le") pass = value <= threshold;
  else if (relation == "lt") pass = value < threshold;
  else throw std::invalid_argument("unknown relation " + relation);
  return {std::move(name), std::move(relation), value, threshold, pass};
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string experiment;
  std::map<std::string, std::string> config;
  Table table;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<Assertion> assertions;
  std::vector<std::string> findings;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  std::string version = kVersion;

  bool passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
  }
};

namespace detail {

inline std::string tag(double s) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "[s=%g]", s);
  return buf;
}

struct Setup {
  domain::BoxGrid box;
  domain::SubDomain omega;
};

inline Setup make_setup(const ExperimentConfig& c, ExperimentReport& report) {
  domain::BoxGrid box = domain::make_box(c.dim, c.box_halfwidth, c.box_nodes);
  domain::SubDomain omega = domain::make_shape(box, domain::parse_shape(c.shape));
  if (!omega.is_connected()) report.warnings.push_back("domain mask is not connected as a grid graph");
  return {box, std::move(omega)};
}

/// Positive ground state of the discrete Dirichlet Laplacian, max-normalized.
inline std::vector<double> ground_state(const domain::SubDomain& omega) {
  const auto lap = operators::assemble_laplacian(omega);
  std::vector<double> u(lap.eigen.vector(0).begin(), lap.eigen.vector(0).end());
  double mx = 0.0;
  for (double& v : u) {
    v = std::abs(v);
    mx = std::max(mx, v);
  }
  for (double& v : u) v /= mx;
  return u;
}

inline void normalize_l2(std::vector<double>& u, double cell_volume) {
  const double n = std::sqrt(cell_volume) * linalg::norm2(u);
  if (n > 0.0)
    for (double& v : u) v /= n;
}

inline double relative_l2_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline void run_spectra(const ExperimentConfig& c, ExperimentReport& rep) {
  const Setup st = make_setup(c, rep);
  rep.table.columns = {"s", "j", "lambda_N", "lambda_D", "margin"};
  for (double s : c.s_values) {
    const auto cmp = operators::compare_spectra(st.omega, st.box, s);
    for (std::size_t j = 0; j < cmp.margins.size(); ++j)
      rep.table.rows.push_back({s, static_cast<double>(j + 1), cmp.navier[j], cmp.dirichlet[j], cmp.margins[j]});
    if (s < 1.0) {
      rep.assertions.push_back(make_assertion("eigenvalue_domination" + tag(s), cmp.min_margin(), "gt", c.tol.strict));
    } else {
      rep.assertions.push_back(make_assertion("coincidence" + tag(s), cmp.max_abs_margin(), "le", c.tol.psd));
    }
  }
}

inline void run_positivity(const ExperimentConfig& c, ExperimentReport& rep) {
  const Setup st = make_setup(c, rep);
  const double cv = st.box.cell_volume();
  rep.table.columns = {"s", "trial", "min_entry", "witness"};
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> inputs;
  inputs.push_back(ground_state(st.omega));
  for (int t = 0; t < c.trials; ++t) {
    std::vector<double> u(st.omega.size());
    for (double& v : u) v = unif(rng);
    inputs.push_back(std::move(u));
  }
  for (auto& u : inputs) normalize_l2(u, cv);
  for (double s : c.s_values) {
    const auto diff = operators::difference_operator(st.omega, st.box, s);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      const auto r = operators::positivity_check(diff, inputs[t]);
      rep.table.rows.push_back({s, static_cast<double>(t), r.min_entry, static_cast<double>(r.witness)});
      worst = std::min(worst, r.min_entry);
      if (r.min_entry < -c.tol.positivity) {
        rep.findings.push_back("positivity violation " + tag(s) + " trial " + std::to_string(t) + ": min entry " +
                               format_double(r.min_entry) + " at node " + std::to_string(r.witness));
      }
    }
    rep.assertions.push_back(make_assertion("positivity_preserving" + tag(s), worst, "ge", -c.tol.positivity));
  }
}

inline void run_monotonicity(const ExperimentConfig& c, ExperimentReport& rep) {
  const Setup st = make_setup(c, rep);
  const double cv = st.box.cell_volume();
  rep.table.columns = {"s", "trial", "outer_nodes", "q_dirichlet", "q_navier_outer", "q_navier_inner", "chain_margin"};
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  std::vector<domain::SubDomain> outers;
  std::vector<std::vector<double>> inputs;
  for (int t = 0; t < c.trials; ++t) {
    if (!c.outer_shape.empty()) {
      domain::SubDomain outer = domain::make_shape(st.box, domain::parse_shape(c.outer_shape));
      if (!domain::is_nested(st.omega, outer)) throw ConfigError({"monotonicity.outer_shape: does not contain shape"});
      outers.push_back(std::move(outer));
    } else {
      std::vector<unsigned char> mask(st.omega.mask().begin(), st.omega.mask().end());
      for (auto& m : mask)
        if (!m) m = coin(rng) ? 1 : 0;
      outers.push_back(domain::make_custom(st.box, std::move(mask)));
    }
    std::vector<double> u(st.omega.size());
    for (double& v : u) v = unif(rng);
    normalize_l2(u, cv);
    inputs.push_back(std::move(u));
  }
  for (double s : c.s_values) {
    const auto dir = operators::dirichlet_operator(st.omega, st.box, s);
    const auto nav = operators::navier_operator(st.omega, s);
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < c.trials; ++t) {
      const auto& outer = outers[t];
      const auto pos = domain::inclusion_positions(st.omega, outer);
      std::vector<double> uo(outer.size(), 0.0);
      for (std::size_t k = 0; k < pos.size(); ++k) uo[pos[k]] = inputs[t][k];
      const double qd = dir.form(inputs[t]);
      const double qo = operators::navier_operator(outer, s).form(uo);
      const double qi = nav.form(inputs[t]);
      const double margin = std::min(qo - qd, qi - qo) / qi;
      worst = std::min(worst, margin);
      rep.table.rows.push_back({s, static_cast<double>(t), static_cast<double>(outer.size()), qd, qo, qi, margin});
    }
    rep.assertions.push_back(make_assertion("monotone_chain" + tag(s), worst, "ge", -c.tol.chain));
  }
}

inline void run_extension(const ExperimentConfig& c, ExperimentReport& rep) {
  const Setup st = make_setup(c, rep);
  const std::vector<double> u = ground_state(st.omega);
  rep.table.columns = {"s",           "q_navier",          "energy_navier",         "gap_navier",
                       "q_dirichlet", "energy_dirichlet",  "gap_dirichlet",         "min_W",
                       "min_interior_W", "trace_gap_navier", "trace_gap_dirichlet", "trace_gap_difference",
                       "residual_navier", "residual_dirichlet"};
  const double height = c.ext_height > 0.0 ? c.ext_height : 8.0 * st.omega.shape().diameter();
  for (double s : c.s_values) {
    const double grading = c.ext_grading > 0.0 ? c.ext_grading : extension::default_grading(s);
    const auto mesh = extension::make_graded_mesh(height, c.ext_cells, grading);
    const auto nav_op = operators::navier_operator(st.omega, s);
    const auto dir_op = operators::dirichlet_operator(st.omega, st.box, s);
    const auto ord = extension::extension_ordering_check(st.omega, u, st.box, s, mesh);
    const double scale = analysis::extension_constant(s) / (2.0 * s);
    const double qn = nav_op.form(u);
    const double qd = dir_op.form(u);
    const double en = scale * ord.navier.energy;
    const double ed = scale * ord.dirichlet.energy;
    const double gap_n = std::abs(en - qn) / qn;
    const double gap_d = std::abs(ed - qd) / qd;

    const auto nav_u = nav_op.apply(u);
    const auto dir_u = dir_op.apply(u);
    std::vector<double> diff_u(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) diff_u[i] = nav_u[i] - dir_u[i];
    const double tg_n = relative_l2_gap(extension::trace_on(ord.navier, st.omega), nav_u);
    const double tg_d = relative_l2_gap(extension::trace_on(ord.dirichlet, st.omega), dir_u);
    const double tg_w = relative_l2_gap(ord.fitted_trace, diff_u);
    rep.table.rows.push_back({s, qn, en, gap_n, qd, ed, gap_d, ord.min_difference, ord.min_interior_difference, tg_n, tg_d,
                              tg_w, ord.navier.residual, ord.dirichlet.residual});
    rep.assertions.push_back(make_assertion("energy_identity_navier" + tag(s), gap_n, "le", c.tol.extension_gap));
    rep.assertions.push_back(make_assertion("energy_identity_dirichlet" + tag(s), gap_d, "le", c.tol.extension_gap));
    rep.assertions.push_back(make_assertion("extension_ordering" + tag(s), ord.min_difference, "ge", -c.tol.ordering));
    rep.assertions.push_back(make_assertion("extension_ordering_strict" + tag(s), ord.min_interior_difference, "gt", 0.0));
    rep.assertions.push_back(make_assertion("difference_trace" + tag(s), tg_w, "le", c.tol.trace));
  }
}

/// Rayleigh quotient of U restricted to the centered half box, zero-padded.
inline double extremal_quotient(int dim, double s, double halfwidth, int nodes) {
  const domain::BoxGrid grid = domain::make_box(dim, halfwidth, nodes);
  const domain::Shape support = dim == 1 ? domain::Shape{domain::ShapeKind::interval, {-0.5 * halfwidth, 0.5 * halfwidth}}
                                         : domain::Shape{domain::ShapeKind::square, {halfwidth}};
  const domain::SubDomain omega = domain::make_shape(grid, support);
  domain::GridFunction u = analysis::extremal_function(grid, dim, s);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    if (!omega.contains_node(i)) u.values[i] = 0.0;
  const double q = operators::fourier_form(u, omega, s);
  const double p = analysis::make_sobolev_setup(dim, s).critical_exponent;
  return analysis::rayleigh_quotient(q, u.values, p, grid.cell_volume());
}

inline void run_sobolev(const ExperimentConfig& c, ExperimentReport& rep) {
  const Setup st = make_setup(c, rep);
  rep.table.columns = {"s", "alpha", "nodes", "quotient", "closed_form", "rel_gap", "iterations", "converged"};
  for (double s : c.s_values) {
    const double closed = analysis::sobolev_constant_closed_form(c.dim, s);
    const double q1 = extremal_quotient(c.dim, s, c.sobolev_halfwidth, c.sobolev_nodes);
    const double q2 = extremal_quotient(c.dim, s, 2.0 * c.sobolev_halfwidth, 2 * c.sobolev_nodes + 1);
    const double g1 = std::abs(q1 - closed) / closed;
    const double g2 = std::abs(q2 - closed) / closed;
    rep.summary.push_back({"closed_form" + tag(s), closed});
    rep.summary.push_back({"extremal_quotient" + tag(s), q1});
    rep.summary.push_back({"extremal_quotient_doubled_box" + tag(s), q2});
    rep.summary.push_back({"extremal_gap" + tag(s), g1});
    rep.summary.push_back({"extremal_gap_doubled_box" + tag(s), g2});
    rep.assertions.push_back(make_assertion("extremal_quotient_gap" + tag(s), g1, "le", c.tol.sobolev));
    rep.assertions.push_back(make_assertion("extremal_gap_shrinks" + tag(s), g2 - g1, "lt", 0.0));

    const double p = analysis::make_sobolev_setup(c.dim, s).critical_exponent;
    std::vector<double> seed = ground_state(st.omega);
    std::vector<double> seed_nodes_prev;
    std::optional<domain::SubDomain> prev;
    double last = std::numeric_limits<double>::infinity();
    double worst_step = std::numeric_limits<double>::infinity();
    for (double alpha : c.alphas) {
      const domain::SubDomain dil = domain::dilate(st.omega, alpha);
      std::vector<double> start(dil.size(), 0.0);
      if (!prev) {
        const auto pos = domain::inclusion_positions(st.omega, dil);
        for (std::size_t k = 0; k < pos.size(); ++k) start[pos[k]] = seed[k];
      } else {
        const auto pos = domain::inclusion_positions(*prev, dil);
        for (std::size_t k = 0; k < pos.size(); ++k) start[pos[k]] = seed_nodes_prev[k];
      }
      const auto op = operators::navier_operator(dil, s);
      const auto res = analysis::minimize_quotient(op, p, start, c.sobolev_max_iter, c.sobolev_tol);
      rep.table.rows.push_back({s, alpha, static_cast<double>(dil.size()), res.value, closed, std::abs(res.value - closed) / closed,
                                static_cast<double>(res.iterations), res.converged ? 1.0 : 0.0});
      if (std::isfinite(last)) worst_step = std::min(worst_step, (last - res.value) / last);
      last = res.value;
      seed_nodes_prev = res.minimizer;
      prev.emplace(dil);
    }
    if (std::isfinite(worst_step)) {
      rep.assertions.push_back(make_assertion("navier_quotient_nonincreasing" + tag(s), worst_step, "ge", -1e-12));
    }
    rep.assertions.push_back(make_assertion("navier_quotient_final_gap" + tag(s), std::abs(last - closed) / closed, "le",
                                            c.tol.navier_sobolev));
  }
}

inline void run_sweep(const ExperimentConfig& c, ExperimentReport& rep) {
  const Setup st = make_setup(c, rep);
  const std::vector<double> u = ground_state(st.omega);
  rep.table.columns = {"s", "alpha", "nodes", "q_navier", "q_dirichlet", "ratio"};
  const domain::BoxGrid box = analysis::sweep_box(st.omega, c.alphas.back(), c.sweep_box_factor);
  for (double s : c.s_values) {
    const auto rows = analysis::dilation_sweep(st.omega, u, s, c.alphas, box);
    double min_ratio = std::numeric_limits<double>::infinity();
    double min_drop = std::numeric_limits<double>::infinity();
    double max_dev = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      rep.table.rows.push_back({s, r.alpha, static_cast<double>(r.nodes), r.q_navier, r.q_dirichlet, r.ratio});
      min_ratio = std::min(min_ratio, r.ratio);
      max_dev = std::max(max_dev, std::abs(r.ratio - 1.0));
      if (k > 0) min_drop = std::min(min_drop, rows[k - 1].ratio - r.ratio);
    }
    rep.assertions.push_back(make_assertion("ratio_at_least_one" + tag(s), min_ratio, "ge", 1.0 - c.tol.psd));
    if (s < 1.0) {
      if (rows.size() > 1) rep.assertions.push_back(make_assertion("ratio_strictly_decreasing" + tag(s), min_drop, "gt", 0.0));
      if (c.tol.final_ratio > 0.0)
        rep.assertions.push_back(make_assertion("final_ratio" + tag(s), rows.back().ratio, "le", c.tol.final_ratio));
    } else {
      rep.assertions.push_back(make_assertion("ratio_identically_one" + tag(s), max_dev, "le", c.tol.psd));
    }
  }
}

}  // namespace detail

/// Runs the configured experiment. Deterministic for a fixed config.
inline ExperimentReport run(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.experiment = to_string(c.kind);
  rep.config = c.entries;
  switch (c.kind) {
    case ExperimentKind::spectra:
      detail::run_spectra(c, rep);
      break;
    case ExperimentKind::positivity:
      detail::run_positivity(c, rep);
      break;
    case ExperimentKind::monotonicity:
      detail::run_monotonicity(c, rep);
      break;
    case ExperimentKind::extension:
      detail::run_extension(c, rep);
      break;
    case ExperimentKind::sobolev:
      detail::run_sobolev(c, rep);
      break;
    case ExperimentKind::sweep:
      detail::run_sweep(c, rep);
      break;
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline std::string to_csv(const ExperimentReport& rep) {
  std::string out;
  for (std::size_t k = 0; k < rep.table.columns.size(); ++k) out += (k ? "," : "") + rep.table.columns[k];
  out += "\n";
  for (const auto& row : rep.table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + detail::format_double(row[k]);
    out += "\n";
  }
  return out;
}

/// JSON mirror of the report. Wall time is deliberately absent so that
/// reruns produce identical bytes.
inline std::string to_json(const ExperimentReport& rep) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["experiment"] = rep.experiment;
  j["version"] = rep.version;
  j["passed"] = rep.passed();
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : rep.config) cfg[k] = v;
  j["config"] = cfg;
  j["columns"] = rep.table.columns;
  j["rows"] = rep.table.rows;
  ordered_json summary = ordered_json::object();
  for (const auto& [k, v] : rep.summary) summary[k] = v;
  j["summary"] = summary;
  ordered_json asserts = ordered_json::array();
  for (const auto& a : rep.assertions) {
    asserts.push_back({{"name", a.name}, {"relation", a.relation}, {"value", a.value}, {"threshold", a.threshold}, {"pass", a.pass}});
  }
  j["assertions"] = asserts;
  j["findings"] = rep.findings;
  j["warnings"] = rep.warnings;
  return j.dump(2) + "\n";
}

enum class ReportFormat { csv, json };

/// Writes `<experiment>.csv` and/or `<experiment>.json` into `dir`.
inline std::vector<std::filesystem::path> write_report(const ExperimentReport& rep, const std::filesystem::path& dir,
                                                       std::vector<ReportFormat> formats = {ReportFormat::csv,
                                                                                            ReportFormat::json}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::filesystem::path> written;
  for (ReportFormat f : formats) {
    const auto path = dir / (rep.experiment + (f == ReportFormat::csv ? ".csv" : ".json"));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_report: cannot write " + path.string());
    out << (f == ReportFormat::csv ? to_csv(rep) : to_json(rep));
    out.close();
    if (!out) throw std::runtime_error("write_report: failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace fraclap::experiment
