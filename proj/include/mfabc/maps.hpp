#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfabc/asmc.hpp"
#include "mfabc/core.hpp"
#include "mfabc/distributions.hpp"
#include "mfabc/simulators.hpp"
#include "mfabc/trace.hpp"

namespace mfabc {

struct MapsConfig {
  std::size_t particles = 5120;
  std::size_t n_hf = 10;
  std::size_t n_lf = 20;
  double alpha = 0.7;
  /// Decay of the auxiliary (LF) threshold; 1 keeps it at its previous value.
  double alpha_lf = 0.7;
  /// Posterior mass the pre-filter may wrongly exclude; sets the critical value.
  double a_lf = 0.001;
  double eps_target = 0.1;
  double ess_fraction = 0.5;
  std::size_t moves_per_iteration = 1;
  std::size_t iteration_cap = 200;
  /// Skip HF simulation of the prior draws; the first move then only needs LF.
  bool defer_initial_hf = true;
  ResamplingScheme resampling = ResamplingScheme::kSystematic;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  void validate() const;
};

/// Lower bound for the auxiliary threshold: the (1 - a_lf) weighted quantile
/// of the minimum LF distances under w_i ∝ W_i #{HF < eps_target} / #{HF < eps}.
/// Returns 0 when no particle has positive mass under those weights.
double critical_value(std::span<const ParticleState> particles, std::span<const double> weights, double eps,
                      double eps_target, double a_lf);

struct AuxThreshold {
  double eps_aux = kInfinity;
  /// Unclamped solution of the proportion-active equation.
  double raw = kInfinity;
  bool clamp_bound = false;
  /// W_{t-1} * I(min LF distance < eps_aux), normalized.
  std::vector<double> weights;
};

AuxThreshold select_aux_threshold(std::span<const ParticleState> particles, std::span<const double> prev_weights,
                                  double alpha_lf, double eps_aux_prev, double lower_bound);

/// One pre-filtering ABC-MCMC step. The proposal first runs n_lf LF
/// simulations and is rejected without HF simulation unless its minimum LF
/// distance is below eps_aux. Surviving proposals run n_hf HF simulations and
/// are accepted with the ABC-MCMC ratio at eps. Proposals outside the prior
/// support skip the HF stage.
///
/// With eps infinite and defer_hf set, the HF indicator is identically one,
/// so no HF simulation is performed and the accepted state keeps an empty HF
/// cache.
MoveOutcome pf_abc_mcmc_move(const ParticleState& state, double eps, double eps_aux, const Prior& prior,
                             const ProposalKernel& kernel, const FidelityPair& pair, std::size_t n_hf,
                             std::size_t n_lf, const RngStream& item, bool defer_hf = false);

/// Multifidelity ABC-SMC with adaptive pre-filtering.
SamplerResult run_maps(const MapsConfig& config, const FidelityPair& pair, const Prior& prior, ProposalKernel& kernel);

}  // namespace mfabc
