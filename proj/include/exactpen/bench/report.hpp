#pragma once

// Report writers for bench runs.
//
// report.csv columns (one row per repetition and solver, in run order):
//   repetition,instance,solver,status,iterations,F,f,ln_F,nnz_x,nnz_z,
//   critical,d_stationary,prox_residual,stationarity_residual,active_set_size
// Floats use 17 significant digits; nnz_z is empty for single-block problems.
// Wall times are kept out of report.csv so that it is byte-identical across runs
// with the same config; they go to timing.csv (repetition,solver,wall_time_sec).
//
// summary.csv columns (one row per solver):
//   solver,runs,converged,mean_iterations,mean_ln_F,mean_nnz_x,mean_nnz_z,
//   d_stationary,best_iterations,best_ln_F

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "exactpen/bench/experiment.hpp"

namespace exactpen::bench {

inline constexpr double plot_epsilon = 1e-16;

inline std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace detail

inline constexpr const char *report_csv_header =
    "repetition,instance,solver,status,iterations,F,f,ln_F,nnz_x,nnz_z,critical,d_stationary,"
    "prox_residual,stationarity_residual,active_set_size";

inline void emit_csv(const std::vector<ReportRow> &rows, std::ostream &out) {
  if (rows.empty())
    throw std::invalid_argument("no report rows to write");
  out << report_csv_header << '\n';
  for (const auto &r : rows) {
    out << r.repetition << ',' << detail::csv_field(r.instance) << ',' << r.solver << ','
        << r.status << ',' << r.iterations << ',' << format_float(r.F) << ','
        << format_float(r.f) << ',' << format_float(r.ln_F) << ',' << r.nnz_x << ',';
    if (r.nnz_z)
      out << *r.nnz_z;
    out << ',' << to_string(r.critical) << ',' << to_string(r.d_stationary) << ','
        << format_float(r.prox_residual) << ',' << format_float(r.stationarity_residual) << ','
        << r.active_set_size << '\n';
  }
}

inline void emit_timing_csv(const std::vector<ReportRow> &rows, std::ostream &out) {
  if (rows.empty())
    throw std::invalid_argument("no report rows to write");
  out << "repetition,solver,wall_time_sec\n";
  for (const auto &r : rows)
    out << r.repetition << ',' << r.solver << ',' << format_float(r.wall_time_sec) << '\n';
}

inline void emit_summary_csv(const std::vector<SummaryRow> &summary, std::ostream &out) {
  if (summary.empty())
    throw std::invalid_argument("no summary rows to write");
  out << "solver,runs,converged,mean_iterations,mean_ln_F,mean_nnz_x,mean_nnz_z,d_stationary,"
         "best_iterations,best_ln_F\n";
  for (const auto &s : summary) {
    out << s.solver << ',' << s.runs << ',' << s.converged << ','
        << format_float(s.mean_iterations) << ',' << format_float(s.mean_ln_F) << ','
        << format_float(s.mean_nnz_x) << ',';
    if (s.mean_nnz_z)
      out << format_float(*s.mean_nnz_z);
    out << ',' << s.d_stationary << ',' << (s.best_iterations ? 1 : 0) << ','
        << (s.best_ln_F ? 1 : 0) << '\n';
  }
}

/// Log-log SVG of F(x_t) - F_min + eps against t + 1, one polyline per trace.
/// F_min is the smallest objective seen across all traces.
inline void emit_plot(const std::vector<RunTrace> &traces, std::ostream &out,
                      const std::string &title = "objective gap vs iteration") {
  if (traces.empty())
    throw std::invalid_argument("no traces to plot");
  double f_min = std::numeric_limits<double>::infinity();
  std::size_t max_len = 0;
  for (const auto &tr : traces) {
    for (const auto &rec : tr.trace)
      f_min = std::min(f_min, rec.F);
    max_len = std::max(max_len, tr.trace.size());
  }
  if (max_len == 0)
    throw std::invalid_argument("traces hold no iterates");

  const double width = 640, height = 420, left = 70, right = 160, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;

  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto &tr : traces)
    for (const auto &rec : tr.trace) {
      const double y = std::log10(rec.F - f_min + plot_epsilon);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  y_lo = std::floor(y_lo);
  y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);
  const double x_hi = std::max(1.0, std::ceil(std::log10(static_cast<double>(max_len))));

  auto px = [&](double t) { return left + pw * std::log10(t + 1.0) / x_hi; };
  auto py = [&](double F) {
    const double y = std::log10(F - f_min + plot_epsilon);
    return top + ph * (y_hi - y) / (y_hi - y_lo);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  static constexpr const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(left) << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n"
      << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = 0; d <= static_cast<int>(x_hi); ++d) {
    const double x = left + pw * d / x_hi;
    out << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(y_lo); d <= static_cast<int>(y_hi); ++d) {
    const double y = top + ph * (y_hi - d) / (y_hi - y_lo);
    out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12)
      << "\" font-size=\"12\" text-anchor=\"middle\">iteration + 1</text>\n"
      << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << num(top + ph / 2)
      << ")\" text-anchor=\"middle\">F - F_min</text>\n";

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto &tr = traces[i];
    const char *color = palette[i % std::size(palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < tr.trace.size(); ++t)
      out << (t ? " " : "") << num(px(static_cast<double>(t))) << ',' << num(py(tr.trace[t].F));
    out << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(i);
    out << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(left + pw + 36) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(left + pw + 42) << "\" y=\"" << num(ly + 4)
        << "\" font-size=\"12\">" << tr.solver << "</text>\n";
  }
  out << "</svg>\n";
}

inline nlohmann::json pattern_to_json(const std::optional<SignPattern> &p) {
  if (!p)
    return nullptr;
  return std::vector<int>(p->entries.begin(), p->entries.end());
}

inline nlohmann::json to_json(const StationarityReport &r) {
  return {{"prox_residual", r.prox_residual},
          {"prox_eta", r.prox_eta},
          {"critical", std::string(to_string(r.critical))},
          {"critical_residual", r.critical_residual},
          {"critical_witness", pattern_to_json(r.critical_witness)},
          {"d_stationary", std::string(to_string(r.d_stationary))},
          {"worst_residual", r.worst_residual},
          {"worst_pattern", pattern_to_json(r.worst_pattern)},
          {"tolerance", r.tolerance},
          {"gradient_scale", r.gradient_scale},
          {"active_set_size", r.active_set_size},
          {"overflow", r.overflow}};
}

inline nlohmann::json certificates_to_json(const std::vector<RunCertificate> &certs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &c : certs) {
    nlohmann::json j{{"repetition", c.repetition}, {"solver", c.solver}, {"x", to_json(c.x)}};
    if (c.z)
      j["z"] = to_json(*c.z);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::json metadata_to_json(const InstanceMetadata &m) {
  nlohmann::json j{{"name", m.name},   {"p", m.p},
                   {"n", m.n},         {"source", m.source},
                   {"seed", m.seed},   {"has_intercept", m.has_intercept}};
  if (m.planted)
    j["planted"] = std::vector<double>(m.planted->data(), m.planted->data() + m.planted->size());
  return j;
}

inline InstanceMetadata metadata_from_json(const nlohmann::json &j) {
  InstanceMetadata m;
  m.name = j.at("name").get<std::string>();
  m.p = j.at("p").get<Index>();
  m.n = j.at("n").get<Index>();
  m.source = j.at("source").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.has_intercept = j.value("has_intercept", false);
  if (j.contains("planted")) {
    const auto v = j.at("planted").get<std::vector<double>>();
    m.planted = Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  }
  return m;
}

} // namespace exactpen::bench
