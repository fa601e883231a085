#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfabc/config.hpp"
#include "mfabc/trace.hpp"

namespace mfabc {

/// One sampler run on one replicate, before anything is written to disk.
struct ReplicateRun {
  SamplerResult result;
  Model model;
  Json summary;
};

/// Runs replicate r with seed output.seed + r. The summary carries the
/// simulation counts both as reported by the sampler and as read from the
/// simulators' call counters.
ReplicateRun run_replicate(const RunConfig& config, std::size_t replicate, unsigned threads);

/// Runs every replicate and writes, under `out`:
///   manifest.json                 expanded config, its hash and base seed
///   replicate_<r>/ensemble.csv    parameters and weight per particle
///   replicate_<r>/trace.csv       deterministic per-iteration record
///   replicate_<r>/timing.csv      wall time per iteration
///   replicate_<r>/summary.json
/// Output is staged next to `out` and moved into place only on success.
/// Returns the replicate summaries.
std::vector<Json> run_experiment(const RunConfig& config, const std::filesystem::path& out);

/// Mean of each metric over replicates for two configs and the percentage
/// change of B relative to A. Writes comparison.csv (one row per replicate
/// and method) and changes.csv under `out`. Throws MetricUnavailable for kl
/// when a config has no reference.
Json compare_experiments(const RunConfig& a, const RunConfig& b, const std::vector<std::string>& metrics,
                         const std::filesystem::path& out);

/// Suitability report of the configured model; writes suitability.json.
Json run_suitability(const RunConfig& config, const std::filesystem::path& out);

/// Quadrature and Monte Carlo checks of the pre-filter theory on the toy
/// model; writes verify.json.
Json run_verify(double y_obs, ToyDistance distance, std::uint64_t seed, unsigned threads,
                const std::filesystem::path& out);

/// Writes the model's observed series to observed.csv (toy: y; OU: t, x;
/// Kuramoto: t, R, Phi).
void generate_observed(const RunConfig& config, const std::filesystem::path& out);

}  // namespace mfabc
