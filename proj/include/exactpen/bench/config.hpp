#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exactpen/errors.hpp"
#include "exactpen/io/instance.hpp"
#include "exactpen/solvers/common.hpp"

namespace exactpen::bench {

/// One value of the flat key = value config language: a number, a boolean, a
/// quoted string or a list of quoted strings.
using ConfigValue = std::variant<double, bool, std::string, std::vector<std::string>>;
using ConfigTable = std::map<std::string, std::pair<ConfigValue, std::size_t>>;

namespace detail {

inline std::string parse_quoted(std::string_view s, std::size_t line) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    throw ParseError(line, "expected a quoted string, got '" + std::string(s) + "'");
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) {
      ++i;
      out += s[i] == 'n' ? '\n' : s[i];
    } else if (s[i] == '"') {
      throw ParseError(line, "unescaped quote inside string");
    } else {
      out += s[i];
    }
  }
  return out;
}

// Strips a '#' comment that is not inside a quoted string.
inline std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && quoted) {
      ++i;
    } else if (s[i] == '"') {
      quoted = !quoted;
    } else if (s[i] == '#' && !quoted) {
      return s.substr(0, i);
    }
  }
  return s;
}

inline ConfigValue parse_value(std::string_view v, std::size_t line) {
  if (v.empty())
    throw ParseError(line, "missing value");
  if (v == "true")
    return true;
  if (v == "false")
    return false;
  if (v.front() == '"')
    return parse_quoted(v, line);
  if (v.front() == '[') {
    if (v.back() != ']')
      throw ParseError(line, "unterminated list");
    std::vector<std::string> items;
    std::string_view body = exactpen::detail::trim(v.substr(1, v.size() - 2));
    while (!body.empty()) {
      std::size_t end = 1;
      while (end < body.size() && !(body[end] == '"' && body[end - 1] != '\\'))
        ++end;
      if (end >= body.size())
        throw ParseError(line, "unterminated string in list");
      items.push_back(parse_quoted(body.substr(0, end + 1), line));
      body = exactpen::detail::trim(body.substr(end + 1));
      if (!body.empty()) {
        if (body.front() != ',')
          throw ParseError(line, "expected ',' between list items");
        body = exactpen::detail::trim(body.substr(1));
      }
    }
    return items;
  }
  return exactpen::detail::parse_double(v, line, "number");
}

} // namespace detail

/// Parses lines of `key = value`. Keys may contain dots (`nepdca.delta`).
/// Blank lines and '#' comments are skipped; a repeated key is an error.
inline ConfigTable parse_config(std::istream &in) {
  ConfigTable table;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = exactpen::detail::trim(detail::strip_comment(raw));
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(line_no, "expected 'key = value'");
    const std::string key(exactpen::detail::trim(line.substr(0, eq)));
    if (key.empty())
      throw ParseError(line_no, "empty key");
    for (char c : key)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'))
        throw ParseError(line_no, "invalid character in key '" + key + "'");
    if (table.count(key))
      throw ParseError(line_no, "duplicate key '" + key + "'");
    table.emplace(key, std::make_pair(detail::parse_value(
                                          exactpen::detail::trim(line.substr(eq + 1)), line_no),
                                      line_no));
  }
  return table;
}

enum class ValueType { number, integer, boolean, string, string_list };

struct SchemaEntry {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string description;
};

/// Solver fields that can be overridden per solver as `<solver>.<field>`.
inline const std::vector<SchemaEntry> &solver_schema() {
  static const std::vector<SchemaEntry> entries = {
      {"max_iters", ValueType::integer, "100000", "iteration cap"},
      {"stop_tol", ValueType::number, "problem preset", "displacement tolerance"},
      {"time_limit", ValueType::number, "inf", "seconds per run"},
      {"eta_lower", ValueType::number, "1e-8", "lower clip of BB steps"},
      {"eta_upper", ValueType::number, "1e8", "upper clip of BB steps"},
      {"eta0", ValueType::number, "1", "first trial step"},
      {"sigma", ValueType::number, "1e-3", "sufficient decrease constant"},
      {"sigma_x", ValueType::number, "1e-3", "x-block sufficient decrease (GPALM)"},
      {"sigma_z", ValueType::number, "1e-3", "z-block sufficient decrease (GPALM)"},
      {"rho", ValueType::number, "2", "backtracking factor"},
      {"rho_x", ValueType::number, "2", "x-block backtracking factor (GPALM)"},
      {"rho_z", ValueType::number, "2", "z-block backtracking factor (GPALM)"},
      {"window", ValueType::integer, "4 (gist), 5 (nepdca), 6 (gpalm)", "nonmonotone window r"},
      {"max_backtracks", ValueType::integer, "200", "line-search cap"},
      {"pgm_eta_factor", ValueType::number, "1.1", "PGM step as a multiple of L"},
      {"palm_eta_x_factor", ValueType::number, "1.1", "PALM x step as a multiple of L_x"},
      {"palm_eta_z_factor", ValueType::number, "1.1", "PALM z step"},
      {"dc_step_factor", ValueType::number, "1", "DC step as a multiple of L"},
      {"delta", ValueType::number, "1e-6", "active-set relaxation (NEPDCA)"},
      {"c", ValueType::number, "0.49 min(L, 1)", "proximal constant (NEPDCA)"},
      {"active_set_cap", ValueType::integer, "100000", "maximum active patterns"},
      {"subgradient_policy", ValueType::string, "canonical",
       "canonical | extreme_negative | index_order"},
      {"extrapolate", ValueType::boolean, "true", "use extrapolation (PDCAe)"},
      {"restart_period", ValueType::integer, "200", "fixed restart period (PDCAe)"},
      {"adaptive_restart", ValueType::boolean, "true", "restart when F increases (PDCAe)"},
  };
  return entries;
}

inline const std::vector<SchemaEntry> &experiment_schema() {
  static const std::vector<SchemaEntry> entries = {
      {"problem", ValueType::string, "sparse_ls", "fig1 | sparse_ls | robust | libsvm"},
      {"solvers", ValueType::string_list, "[\"gist\"]",
       "pgm gist pdca pdcae nepdca (single block); palm gpalm pdcae_proj (robust)"},
      {"repetitions", ValueType::integer, "1", "instances per run"},
      {"seed", ValueType::integer, "0", "base seed; repetition i uses a derived seed"},
      {"p", ValueType::integer, "1000", "number of features (synthetic)"},
      {"n", ValueType::integer, "1000", "number of samples (synthetic)"},
      {"k", ValueType::integer, "300", "sparsity level K"},
      {"kappa", ValueType::integer, "0", "outlier budget (robust)"},
      {"lambda", ValueType::number, "10", "penalty weight (lambda_1 for robust)"},
      {"lambda2", ValueType::number, "lambda", "z-block penalty weight (robust)"},
      {"penalty_bound", ValueType::boolean, "false",
       "robust: set both weights from the exact-penalty bound with C_x = ||x_true||, "
       "C_z = ||z_true||"},
      {"outlier_magnitude", ValueType::number, "10", "robust outlier shift"},
      {"noise_sd", ValueType::number, "0.05 (sparse_ls), 0.1 (robust)", "response noise"},
      {"dataset", ValueType::string, "", "LIBSVM file (problem = libsvm)"},
      {"intercept", ValueType::boolean, "false", "prepend an unpenalized ones column"},
      {"x0_scale", ValueType::number, "0.01 (0.1 for libsvm)",
       "start: planted + scale*nu (sparse_ls) or scale*nu"},
      {"x0", ValueType::number, "0", "starting point of fig1"},
      {"stop_tol", ValueType::number, "1e-8 (synthetic), 1e-6 (libsvm, robust)",
       "displacement tolerance"},
      {"time_limit", ValueType::number, "inf", "seconds per solver run"},
      {"certificate_tol", ValueType::number, "1e-5", "stationarity tolerance"},
      {"plot", ValueType::boolean, "true", "write an SVG of each repetition"},
      {"output_dir", ValueType::string, "bench_out", "directory for reports"},
  };
  return entries;
}

inline std::string_view to_string(ValueType t) {
  switch (t) {
  case ValueType::number:
    return "number";
  case ValueType::integer:
    return "integer";
  case ValueType::boolean:
    return "boolean";
  case ValueType::string:
    return "string";
  case ValueType::string_list:
    return "list of strings";
  }
  return "?";
}

inline std::string schema_text() {
  std::ostringstream out;
  out << "# Experiment configuration: one `key = value` per line, '#' starts a comment.\n"
      << "# Values: numbers, true/false, \"strings\", [\"lists\", \"of\", \"strings\"].\n\n";
  for (const auto &e : experiment_schema())
    out << e.key << " : " << to_string(e.type) << " = " << e.default_value << "\n    "
        << e.description << '\n';
  out << "\n# Per-solver overrides, written `<solver>.<field> = value`, e.g. nepdca.delta = 0.1\n";
  for (const auto &e : solver_schema())
    out << "<solver>." << e.key << " : " << to_string(e.type) << " = " << e.default_value
        << "\n    " << e.description << '\n';
  return out.str();
}

enum class ProblemKind { fig1, sparse_ls, robust, libsvm };

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::sparse_ls;
  std::vector<SolverKind> solvers{SolverKind::gist};
  int repetitions = 1;
  std::uint64_t seed = 0;
  Index p = 1000;
  Index n = 1000;
  Index k = 300;
  Index kappa = 0;
  double lambda = 10.0;
  std::optional<double> lambda2;
  bool penalty_bound = false;
  double outlier_magnitude = 10.0;
  std::optional<double> noise_sd;
  std::string dataset;
  bool intercept = false;
  std::optional<double> x0_scale;
  double x0 = 0.0;
  std::optional<double> stop_tol;
  double time_limit = std::numeric_limits<double>::infinity();
  double certificate_tol = 1e-5;
  bool plot = true;
  std::string output_dir = "bench_out";
  /// Per-solver overrides, keyed by solver then field.
  std::map<SolverKind, std::map<std::string, ConfigValue>> overrides;

  double effective_stop_tol() const {
    if (stop_tol)
      return *stop_tol;
    return problem == ProblemKind::libsvm || problem == ProblemKind::robust ? 1e-6 : 1e-8;
  }
  double effective_x0_scale() const {
    return x0_scale.value_or(problem == ProblemKind::libsvm ? 0.1 : 0.01);
  }
  double effective_noise_sd() const {
    return noise_sd.value_or(problem == ProblemKind::robust ? 0.1 : 0.05);
  }
};

namespace detail {

inline const SchemaEntry *find_entry(const std::vector<SchemaEntry> &schema, std::string_view key) {
  for (const auto &e : schema)
    if (e.key == key)
      return &e;
  return nullptr;
}

inline void check_type(const SchemaEntry &e, const ConfigValue &v, std::size_t line) {
  bool ok = false;
  switch (e.type) {
  case ValueType::number:
    ok = std::holds_alternative<double>(v);
    break;
  case ValueType::integer:
    ok = std::holds_alternative<double>(v) && std::get<double>(v) == std::floor(std::get<double>(v));
    break;
  case ValueType::boolean:
    ok = std::holds_alternative<bool>(v);
    break;
  case ValueType::string:
    ok = std::holds_alternative<std::string>(v);
    break;
  case ValueType::string_list:
    ok = std::holds_alternative<std::vector<std::string>>(v);
    break;
  }
  if (!ok)
    throw ParseError(line, "key '" + e.key + "' expects " + std::string(to_string(e.type)));
}

inline SolverKind require_solver(std::string_view name, std::size_t line) {
  auto k = parse_solver_kind(name);
  if (!k)
    throw ParseError(line, "unknown solver '" + std::string(name) + "'");
  return *k;
}

} // namespace detail

/// Builds an ExperimentConfig, rejecting unknown keys and mistyped values.
inline ExperimentConfig make_experiment_config(const ConfigTable &table) {
  ExperimentConfig cfg;
  bool solvers_given = false;
  for (const auto &[key, entry] : table) {
    const auto &[value, line] = entry;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      const SolverKind kind = detail::require_solver(key.substr(0, dot), line);
      const std::string field = key.substr(dot + 1);
      const auto *e = detail::find_entry(solver_schema(), field);
      if (!e)
        throw ParseError(line, "unknown solver field '" + field + "'");
      detail::check_type(*e, value, line);
      if (field == "subgradient_policy" &&
          !parse_subgradient_policy(std::get<std::string>(value)))
        throw ParseError(line, "unknown subgradient policy '" + std::get<std::string>(value) + "'");
      cfg.overrides[kind][field] = value;
      continue;
    }
    const auto *e = detail::find_entry(experiment_schema(), key);
    if (!e)
      throw ParseError(line, "unknown key '" + key + "'");
    detail::check_type(*e, value, line);
    const auto num = [&] { return std::get<double>(value); };
    const auto str = [&] { return std::get<std::string>(value); };
    if (key == "problem") {
      const auto s = str();
      if (s == "fig1")
        cfg.problem = ProblemKind::fig1;
      else if (s == "sparse_ls")
        cfg.problem = ProblemKind::sparse_ls;
      else if (s == "robust")
        cfg.problem = ProblemKind::robust;
      else if (s == "libsvm")
        cfg.problem = ProblemKind::libsvm;
      else
        throw ParseError(line, "unknown problem '" + s + "'");
    } else if (key == "solvers") {
      cfg.solvers.clear();
      for (const auto &s : std::get<std::vector<std::string>>(value))
        cfg.solvers.push_back(detail::require_solver(s, line));
      solvers_given = true;
    } else if (key == "repetitions") {
      cfg.repetitions = static_cast<int>(num());
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(num());
    } else if (key == "p") {
      cfg.p = static_cast<Index>(num());
    } else if (key == "n") {
      cfg.n = static_cast<Index>(num());
    } else if (key == "k") {
      cfg.k = static_cast<Index>(num());
    } else if (key == "kappa") {
      cfg.kappa = static_cast<Index>(num());
    } else if (key == "lambda") {
      cfg.lambda = num();
    } else if (key == "lambda2") {
      cfg.lambda2 = num();
    } else if (key == "penalty_bound") {
      cfg.penalty_bound = std::get<bool>(value);
    } else if (key == "outlier_magnitude") {
      cfg.outlier_magnitude = num();
    } else if (key == "noise_sd") {
      cfg.noise_sd = num();
    } else if (key == "dataset") {
      cfg.dataset = str();
    } else if (key == "intercept") {
      cfg.intercept = std::get<bool>(value);
    } else if (key == "x0_scale") {
      cfg.x0_scale = num();
    } else if (key == "x0") {
      cfg.x0 = num();
    } else if (key == "stop_tol") {
      cfg.stop_tol = num();
    } else if (key == "time_limit") {
      cfg.time_limit = num();
    } else if (key == "certificate_tol") {
      cfg.certificate_tol = num();
    } else if (key == "plot") {
      cfg.plot = std::get<bool>(value);
    } else if (key == "output_dir") {
      cfg.output_dir = str();
    }
  }
  if (solvers_given && cfg.solvers.empty())
    throw ParseError(0, "at least one solver is required");
  if (cfg.repetitions < 1)
    throw ParseError(0, "repetitions must be at least 1");
  for (auto kind : cfg.solvers) {
    const bool robust = cfg.problem == ProblemKind::robust;
    if (is_two_block(kind) != robust)
      throw ParseError(0, "solver '" + std::string(to_string(kind)) +
                              (robust ? "' does not apply to the robust problem"
                                      : "' applies only to the robust problem"));
  }
  if (cfg.problem == ProblemKind::libsvm && cfg.dataset.empty())
    throw ParseError(0, "problem = \"libsvm\" needs a dataset path");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file '" + path + "'");
  return make_experiment_config(parse_config(in));
}

/// Solver configuration for one run: defaults, then experiment-level stop/time
/// settings, then `<solver>.<field>` overrides.
inline SolverConfig solver_config_for(const ExperimentConfig &exp, SolverKind kind) {
  SolverConfig cfg = default_config(kind);
  cfg.stop_tol = exp.effective_stop_tol();
  cfg.time_limit_sec = exp.time_limit;
  cfg.seed = exp.seed;
  const auto it = exp.overrides.find(kind);
  if (it == exp.overrides.end())
    return cfg;
  for (const auto &[field, value] : it->second) {
    const auto num = [&] { return std::get<double>(value); };
    if (field == "max_iters")
      cfg.max_iters = static_cast<long>(num());
    else if (field == "stop_tol")
      cfg.stop_tol = num();
    else if (field == "time_limit")
      cfg.time_limit_sec = num();
    else if (field == "eta_lower")
      cfg.eta_lower = num();
    else if (field == "eta_upper")
      cfg.eta_upper = num();
    else if (field == "eta0")
      cfg.eta0 = num();
    else if (field == "sigma")
      cfg.sigma = num();
    else if (field == "sigma_x")
      cfg.sigma_x = num();
    else if (field == "sigma_z")
      cfg.sigma_z = num();
    else if (field == "rho")
      cfg.rho = num();
    else if (field == "rho_x")
      cfg.rho_x = num();
    else if (field == "rho_z")
      cfg.rho_z = num();
    else if (field == "window")
      cfg.window = static_cast<int>(num());
    else if (field == "max_backtracks")
      cfg.max_backtracks = static_cast<int>(num());
    else if (field == "pgm_eta_factor")
      cfg.pgm_eta_factor = num();
    else if (field == "palm_eta_x_factor")
      cfg.palm_eta_x_factor = num();
    else if (field == "palm_eta_z_factor")
      cfg.palm_eta_z_factor = num();
    else if (field == "dc_step_factor")
      cfg.dc_step_factor = num();
    else if (field == "delta")
      cfg.delta = num();
    else if (field == "c")
      cfg.c = num();
    else if (field == "active_set_cap")
      cfg.active_set_cap = static_cast<std::size_t>(num());
    else if (field == "subgradient_policy")
      cfg.subgradient_policy = *parse_subgradient_policy(std::get<std::string>(value));
    else if (field == "extrapolate")
      cfg.extrapolate = std::get<bool>(value);
    else if (field == "restart_period")
      cfg.restart_period = static_cast<int>(num());
    else if (field == "adaptive_restart")
      cfg.adaptive_restart = std::get<bool>(value);
  }
  cfg.validate();
  return cfg;
}

} // namespace exactpen::bench
