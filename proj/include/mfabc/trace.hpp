#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "mfabc/core.hpp"

namespace mfabc {

/// One SMC iteration. Row 0 describes the initial prior ensemble.
struct TraceRow {
  std::size_t iteration = 0;
  double epsilon = kInfinity;
  /// Auxiliary (LF) threshold after clamping; NaN for single-fidelity samplers.
  double eps_aux = std::numeric_limits<double>::quiet_NaN();
  /// Critical value lower-bounding eps_aux; NaN for single-fidelity samplers.
  double eps_lower = std::numeric_limits<double>::quiet_NaN();
  bool clamp_bound = false;
  double ess = 0.0;
  double pa = 0.0;
  bool resampled = false;
  /// Cumulative simulation counts at the end of the iteration.
  std::uint64_t hf_calls = 0;
  std::uint64_t lf_calls = 0;
  std::uint64_t prefilter_rejects = 0;
  double mh_accept_rate = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
};

struct ThresholdTrace {
  std::vector<TraceRow> rows;

  /// Number of adaptive iterations (rows after the initial one).
  [[nodiscard]] std::size_t iterations() const noexcept { return rows.empty() ? 0 : rows.size() - 1; }
};

/// Final ensemble plus bookkeeping common to the SMC samplers.
struct SamplerResult {
  WeightedEnsemble ensemble;
  ThresholdTrace trace;
  std::uint64_t hf_calls = 0;
  std::uint64_t lf_calls = 0;
  double wall_time = 0.0;

  [[nodiscard]] std::size_t iterations() const noexcept { return trace.iterations(); }
};

}  // namespace mfabc
