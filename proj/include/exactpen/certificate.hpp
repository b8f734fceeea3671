#pragma once

#include <optional>
#include <string_view>

#include "exactpen/top_k.hpp"

namespace exactpen {

enum class Verdict { no, yes, indeterminate };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::no:
    return "false";
  case Verdict::yes:
    return "true";
  case Verdict::indeterminate:
    return "indeterminate";
  }
  return "indeterminate";
}

/// Where a point sits in the critical / d-stationary hierarchy.
///
/// Invariants: d_stationary == yes implies critical == yes; an overflowing active
/// set yields `indeterminate`, never a false negative.
struct StationarityReport {
  double prox_residual = 0.0;
  double prox_eta = 0.0;
  Verdict critical = Verdict::indeterminate;
  std::optional<SignPattern> critical_witness;
  double critical_residual = 0.0;
  Verdict d_stationary = Verdict::indeterminate;
  std::optional<SignPattern> worst_pattern;
  double worst_residual = 0.0;
  double tolerance = 0.0;
  double gradient_scale = 0.0;
  std::size_t active_set_size = 0;
  bool overflow = false;
};

} // namespace exactpen
