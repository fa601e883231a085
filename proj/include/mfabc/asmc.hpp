#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/distributions.hpp"
#include "mfabc/simulators.hpp"
#include "mfabc/trace.hpp"

namespace mfabc {

struct AsmcConfig {
  std::size_t particles = 5120;
  /// HF simulations per parameter.
  std::size_t n_sims = 10;
  /// Proportion of active particles kept per iteration.
  double alpha = 0.7;
  double eps_target = 0.1;
  /// Resample when ESS < ess_fraction * particles.
  double ess_fraction = 0.5;
  std::size_t moves_per_iteration = 1;
  std::size_t iteration_cap = 200;
  ResamplingScheme resampling = ResamplingScheme::kSystematic;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

/// Next tolerance from PA(eps) = alpha * PA(prev), keyed on each particle's
/// smallest HF distance, clamped below at eps_target.
double select_threshold(std::span<const ParticleState> particles, std::span<const double> prev_weights, double alpha,
                        double eps_prev, double eps_target);

/// W_t ∝ W_{t-1} * #{HF < eps_new} / #{HF < eps_prev}, normalized.
/// Throws ZeroTotalMass if every weight vanishes.
std::vector<double> reweight(std::span<const double> prev_weights, std::span<const ParticleState> particles,
                             double eps_new, double eps_prev);

struct MoveOutcome {
  ParticleState state;
  bool accepted = false;
  /// LF pre-filter rejected the proposal before any HF simulation.
  bool prefiltered = false;
  std::uint64_t hf_calls = 0;
  std::uint64_t lf_calls = 0;
};

/// ABC-MCMC move targeting the ABC posterior at eps with n HF simulations per
/// parameter. The proposal is rejected without simulating when its prior
/// density is zero.
MoveOutcome mh_move(const ParticleState& state, double eps, const Prior& prior, const ProposalKernel& kernel,
                    const FidelityPair& pair, std::size_t n_sims, const RngStream& item);

/// Adaptive ABC-SMC using only the HF simulator of `pair`.
SamplerResult run_asmc(const AsmcConfig& config, const FidelityPair& pair, const Prior& prior, ProposalKernel& kernel);

}  // namespace mfabc
