#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/distributions.hpp"
#include "mfabc/simulators.hpp"

namespace mfabc {

struct IsConfig {
  std::size_t particles = 1000;
  std::size_t n_lf = 20;
  std::size_t n_hf = 10;
  double eps = 0.1;
  double eps_lf = 0.1;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  /// Throws Error naming the first invalid field.
  void validate() const;
};

/// LF weight (pi/q)(theta) * #{k : lf_k < eps_lf}. Throws ZeroProposalDensity
/// when q(theta) = 0.
ImportanceWeight lf_weight(std::span<const double> theta, std::span<const double> lf_distances, double eps_lf,
                           const Prior& prior, const Distribution& proposal);

/// Replaces the LF count by the HF count: w * #HF pass / #LF pass, done in
/// integer arithmetic on the count so the result equals ratio * #HF pass.
ImportanceWeight hf_weight_update(const ImportanceWeight& lf, std::span<const double> lf_distances, double eps_lf,
                                  std::span<const double> hf_distances, double eps);

/// Same update on a plain real weight.
double hf_weight_update(double lf_weight, std::span<const double> lf_distances, double eps_lf,
                        std::span<const double> hf_distances, double eps);

struct IsResult {
  WeightedEnsemble ensemble;
  /// Unnormalized final weights, one per particle.
  std::vector<ImportanceWeight> raw_weights;
  /// Density ratio pi/q at each particle.
  std::vector<double> density_ratios;
  std::vector<bool> survived_prefilter;
  std::uint64_t hf_calls = 0;
  std::uint64_t lf_calls = 0;
};

/// Pre-filtering hierarchical importance sampling. Each particle draws theta
/// from the proposal and runs n_lf LF simulations; only particles with a
/// positive LF weight get n_hf HF simulations. Weights are normalized once at
/// the end. Pre-filtered particles keep an empty HF cache and weight 0.
/// Throws ZeroTotalMass when no particle ends with positive weight.
IsResult run_prefilter_is(const IsConfig& config, const FidelityPair& pair, const Prior& prior,
                          const Distribution& proposal);

/// Plain ABC importance sampling (no LF stage): weight (pi/q) * #{HF < eps}.
IsResult run_abc_is(const IsConfig& config, const FidelityPair& pair, const Prior& prior,
                    const Distribution& proposal);

}  // namespace mfabc
