#include "mfabc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfabc/errors.hpp"

namespace mfabc {

std::size_t count_below(std::span<const double> distances, double eps) noexcept {
  return static_cast<std::size_t>(std::count_if(distances.begin(), distances.end(), [eps](double d) { return d < eps; }));
}

double min_distance(std::span<const double> distances) noexcept {
  double best = kInfinity;
  for (const double d : distances) {
    best = std::min(best, d);
  }
  return best;
}

void ParticleState::set_lf_distances(std::vector<double> distances) {
  lf_distances = std::move(distances);
  min_lf_distance = min_distance(lf_distances);
}

std::vector<double> normalize_weights(std::span<const double> weights) {
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error("normalize_weights: weights must be finite and nonnegative");
    }
    total += w;
  }
  if (total <= 0.0) {
    throw ZeroTotalMass("normalize_weights");
  }
  std::vector<double> out(weights.size());
  std::transform(weights.begin(), weights.end(), out.begin(), [total](double w) { return w / total; });
  return out;
}

double ess(std::span<const double> weights) {
  const double sum_sq = std::accumulate(weights.begin(), weights.end(), 0.0, [](double acc, double w) { return acc + w * w; });
  if (sum_sq <= 0.0) {
    throw ZeroTotalMass("ess");
  }
  return 1.0 / sum_sq;
}

double proportion_active(std::span<const double> weights) noexcept {
  if (weights.empty()) {
    return 0.0;
  }
  const auto active = std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; });
  return static_cast<double>(active) / static_cast<double>(weights.size());
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
  if (values.size() != weights.size()) {
    throw LengthMismatch("weighted_quantile: values and weights differ in length");
  }
  std::vector<std::size_t> order;
  order.reserve(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0) {
      order.push_back(i);
      total += weights[i];
    }
  }
  if (order.empty() || total <= 0.0) {
    throw ZeroTotalMass("weighted_quantile");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  // Relative slack absorbs rounding in the running sum (q = 1 must hit the max).
  const double target = q * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cumulative += weights[order[k]];
    const bool last_of_ties = k + 1 == order.size() || values[order[k + 1]] != values[order[k]];
    if (cumulative >= target && last_of_ties) {
      return values[order[k]];
    }
  }
  return values[order.back()];
}

std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count, RngStream& rng,
                                          ResamplingScheme scheme) {
  const std::vector<double> w = normalize_weights(weights);
  std::vector<double> cdf(w.size());
  std::partial_sum(w.begin(), w.end(), cdf.begin());
  cdf.back() = 1.0;
  std::vector<std::size_t> out;
  out.reserve(count);
  auto ancestor = [&](double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto idx = static_cast<std::size_t>(std::distance(cdf.begin(), it));
    idx = std::min(idx, w.size() - 1);
    // never select a zero-weight particle because of rounding at a flat step
    while (w[idx] <= 0.0 && idx > 0) {
      --idx;
    }
    return idx;
  };
  if (scheme == ResamplingScheme::kSystematic) {
    const double step = 1.0 / static_cast<double>(count);
    const double offset = rng.uniform() * step;
    for (std::size_t j = 0; j < count; ++j) {
      out.push_back(ancestor(offset + static_cast<double>(j) * step));
    }
  } else {
    for (std::size_t j = 0; j < count; ++j) {
      out.push_back(ancestor(rng.uniform()));
    }
  }
  return out;
}

WeightedEnsemble resample(const WeightedEnsemble& ensemble, RngStream& rng, ResamplingScheme scheme) {
  const std::size_t n = ensemble.size();
  const auto ancestors = resample_indices(ensemble.weights, n, rng, scheme);
  WeightedEnsemble out;
  out.particles.reserve(n);
  for (const std::size_t a : ancestors) {
    out.particles.push_back(ensemble.particles[a]);
  }
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  out.normalized = true;
  out.generation = ensemble.generation;
  return out;
}

double solve_active_threshold(std::span<const double> keys, std::span<const double> prev_weights, double alpha,
                              double eps_prev) {
  if (keys.size() != prev_weights.size()) {
    throw LengthMismatch("solve_active_threshold: keys and weights differ in length");
  }
  std::vector<double> active;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (prev_weights[i] > 0.0) {
      active.push_back(keys[i]);
    }
  }
  const auto target = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(active.size())));
  if (target == 0) {
    throw NoActiveParticles("solve_active_threshold: alpha * active count rounds to zero (active=" +
                            std::to_string(active.size()) + ")");
  }
  if (target >= active.size()) {
    return eps_prev;
  }
  std::sort(active.begin(), active.end());
  double eps = active[target];
  if (eps <= active.front()) {
    // ties at the minimum: keep the tied block active rather than nobody
    const auto next = std::upper_bound(active.begin(), active.end(), active.front());
    eps = next == active.end() ? eps_prev : *next;
  }
  return std::min(eps, eps_prev);
}

}  // namespace mfabc
