#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mfabc/rng.hpp"

namespace mfabc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

using ParameterVector = std::vector<double>;

/// Number of distances strictly below eps.
std::size_t count_below(std::span<const double> distances, double eps) noexcept;

/// Smallest entry, +inf for an empty span.
double min_distance(std::span<const double> distances) noexcept;

/// One parameter value with its cached high- and low-fidelity distances.
///
/// An empty `hf_distances` means the particle has never been simulated at
/// high fidelity; that is different from having been simulated and failing.
struct ParticleState {
  ParameterVector theta;
  std::vector<double> hf_distances;
  std::vector<double> lf_distances;
  double min_lf_distance = kInfinity;

  [[nodiscard]] bool has_hf() const noexcept { return !hf_distances.empty(); }
  [[nodiscard]] std::size_t hf_passes(double eps) const noexcept { return count_below(hf_distances, eps); }
  [[nodiscard]] std::size_t lf_passes(double eps) const noexcept { return count_below(lf_distances, eps); }
  [[nodiscard]] double min_hf_distance() const noexcept { return min_distance(hf_distances); }

  void set_lf_distances(std::vector<double> distances);
};

struct WeightedEnsemble {
  std::vector<ParticleState> particles;
  std::vector<double> weights;
  bool normalized = false;
  std::size_t generation = 0;

  [[nodiscard]] std::size_t size() const noexcept { return particles.size(); }
};

/// Weight written as (prior/proposal density ratio) x (indicator count).
///
/// Keeping the integer count separate lets count-ratio updates be applied
/// exactly; value() is then bit-identical to ratio * final_count.
struct ImportanceWeight {
  double ratio = 0.0;
  std::size_t count = 0;

  [[nodiscard]] double value() const noexcept { return ratio * static_cast<double>(count); }
};

/// Scales to unit sum. Throws ZeroTotalMass when every entry is zero.
std::vector<double> normalize_weights(std::span<const double> weights);

/// 1 / sum(w^2) for normalized weights.
double ess(std::span<const double> weights);

/// Fraction of strictly positive entries.
double proportion_active(std::span<const double> weights) noexcept;

/// Left-continuous inverse of the weighted CDF: the smallest value v whose
/// normalized cumulative weight over {values <= v} reaches q.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

enum class ResamplingScheme { kSystematic, kMultinomial };

/// Ancestor indices for `count` draws with probabilities proportional to weights.
std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count, RngStream& rng,
                                          ResamplingScheme scheme = ResamplingScheme::kSystematic);

/// Copies whole particle states (caches included) by ancestor; weights become 1/N.
WeightedEnsemble resample(const WeightedEnsemble& ensemble, RngStream& rng,
                          ResamplingScheme scheme = ResamplingScheme::kSystematic);

/// Solves PA(eps) = alpha * PA(prev) where a particle stays active at eps iff
/// its previous weight is positive and its key distance is below eps.
///
/// Returns the largest eps <= eps_prev leaving round(alpha * active) particles
/// active, i.e. the (m+1)-th smallest active key. If ties at the smallest key
/// would leave nobody active, the next distinct key is used instead. Throws
/// NoActiveParticles when the target count rounds to zero.
double solve_active_threshold(std::span<const double> keys, std::span<const double> prev_weights, double alpha,
                              double eps_prev);

}  // namespace mfabc
