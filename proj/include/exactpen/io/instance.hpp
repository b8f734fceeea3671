#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "exactpen/design_matrix.hpp"
#include "exactpen/top_k.hpp"

namespace exactpen {

struct InstanceMetadata {
  std::string name;
  Index p = 0;
  Index n = 0;
  std::string source;
  std::uint64_t seed = 0;
  std::optional<Vector> planted;
  bool has_intercept = false;
};

/// Design matrix, response and provenance of one regression problem.
struct Instance {
  DesignMatrix A;
  Vector b;
  InstanceMetadata meta;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view tok, std::size_t line, const char *what) {
  double v = 0.0;
  const auto *end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError(line, std::string("cannot parse ") + what + " '" + std::string(tok) + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// Reads "label idx:val idx:val ..." lines. Indices are 1-based in the file and
/// 0-based in memory; they must increase strictly within a line. Blank lines and
/// anything after '#' are ignored. The column count is the largest index seen,
/// or `min_cols` if that is larger.
inline Instance parse_libsvm(std::istream &in, Index min_cols = 0) {
  std::vector<Index> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  std::vector<double> labels;
  Index n_cols = min_cols;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty())
      continue;

    std::size_t pos = 0;
    auto next_token = [&]() -> std::string_view {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
        ++pos;
      const std::size_t start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t')
        ++pos;
      return line.substr(start, pos - start);
    };

    labels.push_back(detail::parse_double(next_token(), line_no, "label"));
    Index last = 0;
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected idx:val, got '" + std::string(tok) + "'");
      Index idx = 0;
      const auto idx_tok = tok.substr(0, colon);
      auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size() || idx < 1)
        throw ParseError(line_no, "invalid feature index '" + std::string(idx_tok) + "'");
      if (idx <= last)
        throw ParseError(line_no, "feature indices must be strictly increasing (" +
                                      std::to_string(idx) + " after " + std::to_string(last) +
                                      ")");
      last = idx;
      cols.push_back(idx - 1);
      vals.push_back(detail::parse_double(tok.substr(colon + 1), line_no, "feature value"));
      n_cols = std::max(n_cols, idx);
    }
    offsets.push_back(static_cast<Index>(cols.size()));
  }

  const auto n_rows = static_cast<Index>(labels.size());
  Instance inst;
  inst.A = DesignMatrix::from_csr(n_rows, n_cols, offsets, cols, vals);
  inst.b = Eigen::Map<const Vector>(labels.data(), n_rows);
  inst.meta.p = n_cols;
  inst.meta.n = n_rows;
  inst.meta.source = "libsvm";
  return inst;
}

/// Writes one line per row with 17 significant digits; exact zeros are omitted.
inline void serialize_libsvm(const Instance &inst, std::ostream &out) {
  const auto &A = inst.A;
  for (Index i = 0; i < A.rows(); ++i) {
    out << detail::format_double(inst.b[i]);
    if (const auto *d = A.dense()) {
      for (Index j = 0; j < d->cols(); ++j)
        if ((*d)(i, j) != 0.0)
          out << ' ' << (j + 1) << ':' << detail::format_double((*d)(i, j));
    } else {
      for (CsrMatrix::InnerIterator it(*A.sparse(), i); it; ++it)
        if (it.value() != 0.0)
          out << ' ' << (it.col() + 1) << ':' << detail::format_double(it.value());
    }
    out << '\n';
  }
}

/// Prepends an all-ones column (new index 0). Returns the penalty exclusion set {0}.
inline std::pair<Instance, ExcludedSet> add_intercept(const Instance &inst) {
  if (inst.meta.has_intercept)
    throw InvalidDataError("instance already has an intercept column");
  Instance out{inst.A.with_leading_ones(), inst.b, inst.meta};
  out.meta.has_intercept = true;
  out.meta.p = out.A.cols();
  if (out.meta.planted) {
    Vector planted(out.meta.p);
    planted[0] = 0.0;
    planted.tail(inst.A.cols()) = *inst.meta.planted;
    out.meta.planted = std::move(planted);
  }
  return {std::move(out), ExcludedSet{0}};
}

/// Point files hold one coordinate per line with 17 significant digits.
inline void write_vector(const Vector &v, std::ostream &out) {
  for (Index i = 0; i < v.size(); ++i)
    out << detail::format_double(v[i]) << '\n';
}

/// Reads whitespace-separated numbers; '#' starts a comment.
inline Vector read_vector(std::istream &in) {
  std::vector<double> vals;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t\r", pos);
      if (start == std::string_view::npos)
        break;
      auto end = line.find_first_of(" \t\r", start);
      if (end == std::string_view::npos)
        end = line.size();
      vals.push_back(detail::parse_double(line.substr(start, end - start), line_no, "value"));
      pos = end;
    }
  }
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

} // namespace exactpen
