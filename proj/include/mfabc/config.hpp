#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfabc/models.hpp"

namespace mfabc {

using Json = nlohmann::ordered_json;

struct ModelSpec {
  std::string name;
  /// Scalar observation for the toy models.
  double y_obs = 0.0;
  /// Toy discrepancy: "squared" (default) or "absolute".
  std::string toy_distance = "squared";
  ParameterVector true_theta;
  std::uint64_t observed_seed = 1;
  /// CSV holding the observed series; generated from true_theta when empty.
  std::string observed_file;
  double s1_divisor = 150.0;
  std::vector<double> prior_lower;
  std::vector<double> prior_upper;
  std::size_t oscillators = 32;
  /// "default" or "hf" (use the HF simulator as its own LF model).
  std::string lf = "default";
  bool common_random_numbers = false;
};

struct SamplerSpec {
  /// asmc, maps, is, abc-is or mcmc-reference.
  std::string name;
  std::size_t particles = 5120;
  std::size_t n_hf = 10;
  std::size_t n_lf = 20;
  double alpha = 0.7;
  double alpha_lf = 0.7;
  double a_lf = 0.001;
  double eps_target = 0.1;
  /// Pre-filter tolerance of the importance sampler.
  double eps_lf = 0.1;
  double ess_fraction = 0.5;
  std::size_t moves = 1;
  std::size_t iteration_cap = 200;
  bool defer_initial_hf = true;
  std::string resampling = "systematic";
  std::size_t chains = 10;
  std::size_t iterations = 50000;
  double burn_in = 0.2;
  std::size_t thin = 10;
  std::size_t start_particles = 512;
};

struct SuitabilitySpec {
  std::size_t samples = 5000;
  double kappa = 0.1;
  std::size_t n_lf = 20;
  std::size_t n_hf = 10;
  double eps = 0.1;
};

struct ReferenceSpec {
  /// none, analytic (toy models) or samples (CSV of parameter rows).
  std::string kind = "none";
  std::string path;
};

struct OutputSpec {
  std::string directory = "out";
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct RunConfig {
  ModelSpec model;
  SamplerSpec sampler;
  SuitabilitySpec suitability;
  ReferenceSpec reference;
  OutputSpec output;
  bool has_sampler = false;
  bool has_suitability = false;
};

/// Validates and fills defaults. Unknown keys, wrong types and missing
/// required fields raise ConfigError naming the offending field.
RunConfig parse_run_config(const Json& json);
/// Reads a config file, or the config embedded in a run manifest.
RunConfig load_run_config(const std::filesystem::path& path);
/// Fully expanded config; parse_run_config(to_json(c)) reproduces c.
Json to_json(const RunConfig& config);

/// FNV-1a 64-bit hash of the compact JSON text, as 16 hex digits. The output
/// directory and thread count do not affect results and are left out.
std::string config_hash(const Json& json);

Model build_model(const ModelSpec& spec);

ToyDistance toy_distance(const ModelSpec& spec);

}  // namespace mfabc
