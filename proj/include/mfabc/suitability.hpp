#pragma once

#include <cstdint>

#include "mfabc/distributions.hpp"
#include "mfabc/simulators.hpp"

namespace mfabc {

struct SuitabilityConfig {
  std::size_t samples = 5000;
  /// Target proportion of HF-accepted samples.
  double kappa = 0.1;
  std::size_t n_lf = 20;
  std::size_t n_hf = 10;
  /// Final HF tolerance; epsilon0 is never set below it.
  double eps = 0.1;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

struct SuitabilityReport {
  double epsilon0 = 0.0;
  double epsilon_tilde0 = 0.0;
  /// Pre-screen passes over (1 - kappa) N0. Ranges over
  /// [kappa / (1 - kappa), 1 / (1 - kappa)]; lower is better.
  double e = 0.0;
  double kappa = 0.0;
  std::size_t samples = 0;
  /// Samples with positive HF weight at epsilon0.
  std::size_t hf_accepted = 0;
  /// Samples with at least one LF distance <= epsilon_tilde0.
  std::size_t prefilter_passed = 0;
  /// HF-accepted samples that also pass the pre-screen (all of them by construction).
  std::size_t true_positives = 0;
  std::uint64_t hf_calls = 0;
  std::uint64_t lf_calls = 0;

  [[nodiscard]] double lower_bound() const noexcept { return kappa / (1.0 - kappa); }
  [[nodiscard]] double upper_bound() const noexcept { return 1.0 / (1.0 - kappa); }
};

/// Measures how well the LF model of `pair` screens for HF acceptance.
///
/// Draws N0 parameters from `proposal`, simulates both fidelities, fixes
/// epsilon0 so a fraction kappa of samples has positive HF weight, sets
/// epsilon_tilde0 to the largest minimum LF distance among those samples and
/// counts samples whose LF batch reaches it. Throws NoAcceptedSamples when no
/// sample gets positive HF weight.
SuitabilityReport assess_suitability(const SuitabilityConfig& config, const FidelityPair& pair, const Prior& prior,
                                     const Distribution& proposal);

}  // namespace mfabc
