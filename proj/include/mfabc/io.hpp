#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/trace.hpp"

namespace mfabc {

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws Error when the column is absent.
  [[nodiscard]] std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Shortest text that reads back to the same double ("inf", "nan" for specials).
std::string format_double(double value);

/// Columns: one per parameter name, then weight.
void write_ensemble_csv(const std::filesystem::path& path, const WeightedEnsemble& ensemble,
                        const std::vector<std::string>& parameter_names);

/// Deterministic per-iteration columns: iteration, epsilon, eps_aux,
/// eps_lower, clamp_bound, ess, pa, resampled, hf_calls, lf_calls,
/// prefilter_rejects, mh_accept_rate.
void write_trace_csv(const std::filesystem::path& path, const ThresholdTrace& trace);

/// Columns: iteration, wall_time.
void write_timing_csv(const std::filesystem::path& path, const ThresholdTrace& trace);

}  // namespace mfabc
