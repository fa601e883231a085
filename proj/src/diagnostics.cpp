#include "mfabc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <string>

#include "mfabc/asmc.hpp"
#include "mfabc/errors.hpp"
#include "mfabc/parallel.hpp"

namespace mfabc {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2) {
    throw Error("uniform_grid: need at least two points");
  }
  std::vector<double> grid(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    grid[j] = lo + step * static_cast<double>(j);
  }
  grid.back() = hi;
  return grid;
}

double trapezoid(std::span<const double> grid, std::span<const double> f) {
  if (grid.size() != f.size()) {
    throw LengthMismatch("trapezoid: grid and values differ in length");
  }
  double total = 0.0;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    total += 0.5 * (f[j] + f[j - 1]) * (grid[j] - grid[j - 1]);
  }
  return total;
}

double toy_acceptance_probability(double mean, double y_obs, double eps, ToyDistance distance) noexcept {
  if (std::isinf(eps)) {
    return 1.0;
  }
  const double w = toy_window(eps, distance);
  return normal_cdf((y_obs + w - mean) / kToyNoiseSd) - normal_cdf((y_obs - w - mean) / kToyNoiseSd);
}

double prefilter_survival(double p_lf, std::size_t n_lf) noexcept {
  return 1.0 - std::pow(1.0 - p_lf, static_cast<double>(n_lf));
}

namespace {

std::vector<double> normalized_on_grid(std::vector<double> f, std::span<const double> grid, const char* where) {
  const double mass = trapezoid(grid, f);
  if (!(mass > 0.0)) {
    throw ZeroTotalMass(where);
  }
  for (double& v : f) {
    v /= mass;
  }
  return f;
}

double maps_unnormalized(double theta, double y_obs, double eps, double eps_aux, std::size_t n_lf,
                         ToyDistance distance) {
  const double p = toy_acceptance_probability(toy_hf_mean(theta), y_obs, eps, distance);
  const double p_lf = toy_acceptance_probability(toy_lf_mean(theta), y_obs, eps_aux, distance);
  return p * prefilter_survival(p_lf, n_lf);
}

}  // namespace

std::vector<double> toy_exact_abc_posterior(double y_obs, double eps, std::span<const double> grid,
                                            ToyDistance distance) {
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    f[j] = toy_acceptance_probability(toy_hf_mean(grid[j]), y_obs, eps, distance);
  }
  return normalized_on_grid(std::move(f), grid, "toy_exact_abc_posterior");
}

std::vector<double> maps_exact_posterior(double y_obs, double eps, double eps_aux, std::size_t n_lf,
                                         std::span<const double> grid, ToyDistance distance) {
  std::vector<double> f(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    f[j] = maps_unnormalized(grid[j], y_obs, eps, eps_aux, n_lf, distance);
  }
  return normalized_on_grid(std::move(f), grid, "maps_exact_posterior");
}

std::vector<double> discrete_maps_posterior(double y_obs, double eps, double eps_aux, std::size_t n_lf,
                                            std::span<const double> support, ToyDistance distance) {
  std::vector<double> f(support.size());
  for (std::size_t j = 0; j < support.size(); ++j) {
    f[j] = maps_unnormalized(support[j], y_obs, eps, eps_aux, n_lf, distance);
  }
  return normalize_weights(f);
}

std::vector<double> empirical_pmf(std::span<const ParticleState> particles, std::span<const double> weights,
                                  const GridPrior& support) {
  std::vector<double> pmf(support.points().size(), 0.0);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const std::size_t j = support.index_of(particles[i].theta.at(0));
    if (j == GridPrior::npos) {
      throw Error("empirical_pmf: particle off the support grid");
    }
    pmf[j] += weights[i];
  }
  return normalize_weights(pmf);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw LengthMismatch("total_variation: distributions differ in length");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    sum += std::abs(p[j] - q[j]);
  }
  return 0.5 * sum;
}

double kl_divergence_binned(std::span<const double> samples, std::span<const double> weights,
                            std::span<const double> grid, std::span<const double> reference_density, double lo,
                            double hi, std::size_t bins) {
  if (samples.size() != weights.size()) {
    throw LengthMismatch("kl_divergence_binned: samples and weights differ in length");
  }
  if (grid.size() < 2 || grid.size() != reference_density.size()) {
    throw EmptyReference("kl_divergence_binned: reference density needs at least two grid points");
  }
  if (samples.empty()) {
    throw Error("kl_divergence_binned: no samples");
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  auto bin_of = [&](double x) -> std::size_t {
    if (x < lo || x > hi) {
      return bins;
    }
    return std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
  };
  std::vector<double> q(bins, 0.0);
  for (std::size_t j = 1; j < grid.size(); ++j) {
    const std::size_t b = bin_of(0.5 * (grid[j] + grid[j - 1]));
    if (b < bins) {
      q[b] += 0.5 * (reference_density[j] + reference_density[j - 1]) * (grid[j] - grid[j - 1]);
    }
  }
  std::vector<double> p(bins, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t b = bin_of(samples[i]);
    if (b < bins) {
      p[b] += weights[i];
    }
  }
  p = normalize_weights(p);
  q = normalize_weights(q);
  double kl = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (p[b] > 0.0) {
      if (!(q[b] > 0.0)) {
        return kInfinity;
      }
      kl += p[b] * std::log(p[b] / q[b]);
    }
  }
  return kl;
}

namespace {

/// k-th smallest strictly positive squared distance from `point` to `rows`.
double kth_positive_sq_distance(const std::vector<double>& point, const std::vector<std::vector<double>>& rows,
                                std::span<const double> scale, std::size_t k) {
  std::vector<double> best(k, kInfinity);
  for (const auto& r : rows) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < point.size(); ++c) {
      const double diff = (point[c] - r[c]) / scale[c];
      d2 += diff * diff;
    }
    if (d2 > 0.0 && d2 < best.back()) {
      auto pos = std::upper_bound(best.begin(), best.end(), d2);
      best.insert(pos, d2);
      best.pop_back();
    }
  }
  return best.back();
}

}  // namespace

double kl_divergence_knn(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                         std::size_t k) {
  if (y.empty()) {
    throw EmptyReference("kl_divergence_knn: reference sample is empty");
  }
  if (x.size() < k + 1) {
    throw Error("kl_divergence_knn: need more than k samples");
  }
  const std::size_t d = y.front().size();
  std::vector<double> scale(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (const auto& r : y) {
      mean += r[c];
    }
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (const auto& r : y) {
      var += (r[c] - mean) * (r[c] - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(y.size()));
    if (sd > 0.0) {
      scale[c] = sd;
    }
  }
  double sum = 0.0;
  for (const auto& xi : x) {
    const double rho2 = kth_positive_sq_distance(xi, x, scale, k);
    const double nu2 = kth_positive_sq_distance(xi, y, scale, k);
    if (std::isinf(rho2) || std::isinf(nu2)) {
      throw Error("kl_divergence_knn: fewer than k distinct neighbours");
    }
    sum += 0.5 * std::log(nu2 / rho2);
  }
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  return static_cast<double>(d) * sum / n + std::log(m / (n - 1.0));
}

std::vector<std::vector<double>> resampled_rows(std::span<const ParticleState> particles,
                                                std::span<const double> weights, std::size_t count, RngStream& rng) {
  const auto idx = resample_indices(weights, count, rng, ResamplingScheme::kSystematic);
  std::vector<std::vector<double>> rows;
  rows.reserve(count);
  for (const std::size_t i : idx) {
    rows.push_back(particles[i].theta);
  }
  return rows;
}

Prop2Check verify_prop2_bound(double y_obs, double eps, double eps_aux, std::size_t n_lf,
                              std::span<const double> grid, ToyDistance distance) {
  const std::vector<double> exact = toy_exact_abc_posterior(y_obs, eps, grid, distance);
  std::vector<double> excluded(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double p_lf = toy_acceptance_probability(toy_lf_mean(grid[j]), y_obs, eps_aux, distance);
    excluded[j] = exact[j] * std::pow(1.0 - p_lf, static_cast<double>(n_lf));
  }
  Prop2Check out;
  out.a_lf = trapezoid(grid, excluded);
  if (out.a_lf >= 1.0 - 1e-12) {
    throw AssumptionViolated("verify_prop2_bound: pre-filter excludes all posterior mass (a_L = " +
                             std::to_string(out.a_lf) + ")");
  }
  const std::vector<double> filtered = maps_exact_posterior(y_obs, eps, eps_aux, n_lf, grid, distance);
  std::vector<double> diff(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    diff[j] = std::abs(filtered[j] - exact[j]);
  }
  out.l1_distance = trapezoid(grid, diff);
  out.bound = 1.0 / (1.0 - out.a_lf) - (1.0 - out.a_lf);
  // quadrature rounding only; both sides vanish together when a_L = 0
  out.holds = out.l1_distance <= out.bound + 1e-12;
  return out;
}

double toy_prefilter_rate(double y_obs, double eps_aux, std::size_t n_lf, std::span<const double> grid,
                          ToyDistance distance) {
  std::vector<double> rejected(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double p_lf = toy_acceptance_probability(toy_lf_mean(grid[j]), y_obs, eps_aux, distance);
    rejected[j] = std::pow(1.0 - p_lf, static_cast<double>(n_lf));
  }
  return trapezoid(grid, rejected) / (grid.back() - grid.front());
}

RateEstimate prefilter_rate_mc(const FidelityPair& pair, const Prior& prior, double eps_aux, std::size_t n_lf,
                               std::size_t draws, std::uint64_t seed, unsigned threads) {
  std::vector<char> rejected(draws, 0);
  parallel_for(draws, threads, [&](std::size_t i) {
    const RngStream item = RngStream::for_item(seed, StreamTag::kDiagnostic, 0, i);
    RngStream draw = item.child(StreamTag::kInit, 0);
    const ParameterVector theta = prior.sample(draw);
    rejected[i] = min_distance(pair.lf_distances(theta, item, n_lf)) < eps_aux ? 0 : 1;
  });
  const auto n = static_cast<double>(draws);
  const double rate = static_cast<double>(std::count(rejected.begin(), rejected.end(), 1)) / n;
  return {rate, std::sqrt(rate * (1.0 - rate) / n)};
}

McmcReferenceResult run_abc_mcmc(const McmcReferenceConfig& config, const FidelityPair& pair, const Prior& prior,
                                 const ProposalKernel& kernel, const std::vector<ParticleState>& starts) {
  if (starts.empty()) {
    throw Error("run_abc_mcmc: no starting states");
  }
  if (config.chains < 1 || config.iterations < 1 || config.thin < 1) {
    throw Error("run_abc_mcmc: chains, iterations and thin must be >= 1");
  }
  const auto burn = static_cast<std::size_t>(config.burn_in * static_cast<double>(config.iterations));
  std::vector<std::vector<std::vector<double>>> per_chain(config.chains);
  std::vector<std::uint64_t> accepted(config.chains, 0);
  std::vector<std::uint64_t> hf(config.chains, 0);
  parallel_for(config.chains, config.threads, [&](std::size_t c) {
    ParticleState state = starts[c % starts.size()];
    if (state.hf_passes(config.eps) == 0) {
      throw Error("run_abc_mcmc: starting state " + std::to_string(c) + " does not pass at eps");
    }
    for (std::size_t j = 0; j < config.iterations; ++j) {
      const RngStream item = RngStream::for_item(config.seed, StreamTag::kChain, c, j);
      MoveOutcome mv = mh_move(state, config.eps, prior, kernel, pair, config.n_sims, item);
      accepted[c] += mv.accepted ? 1 : 0;
      hf[c] += mv.hf_calls;
      state = std::move(mv.state);
      if (j >= burn && (j - burn) % config.thin == 0) {
        per_chain[c].push_back(state.theta);
      }
    }
  });
  McmcReferenceResult out;
  std::uint64_t total_accepted = 0;
  for (std::size_t c = 0; c < config.chains; ++c) {
    out.samples.insert(out.samples.end(), per_chain[c].begin(), per_chain[c].end());
    total_accepted += accepted[c];
    out.hf_calls += hf[c];
  }
  out.accept_rate =
      static_cast<double>(total_accepted) / static_cast<double>(config.chains * config.iterations);
  return out;
}

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    s += (a[c] - b[c]) * (a[c] - b[c]);
  }
  return std::sqrt(s);
}

/// Energy statistic of the split (first n_x entries of `order` vs the rest)
/// over a pooled distance matrix.
double energy_from_matrix(const std::vector<double>& dist, std::size_t total, const std::vector<std::size_t>& order,
                          std::size_t n_x) {
  double xy = 0.0;
  double xx = 0.0;
  double yy = 0.0;
  for (std::size_t a = 0; a < total; ++a) {
    const std::size_t ia = order[a];
    for (std::size_t b = a + 1; b < total; ++b) {
      const double d = dist[ia * total + order[b]];
      if (b < n_x) {
        xx += d;
      } else if (a >= n_x) {
        yy += d;
      } else {
        xy += d;
      }
    }
  }
  const auto nx = static_cast<double>(n_x);
  const auto ny = static_cast<double>(total - n_x);
  return 2.0 * xy / (nx * ny) - 2.0 * xx / (nx * nx) - 2.0 * yy / (ny * ny);
}

}  // namespace

double energy_distance(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y) {
  if (x.empty() || y.empty()) {
    throw EmptyReference("energy_distance: empty sample");
  }
  double xy = 0.0;
  for (const auto& a : x) {
    for (const auto& b : y) {
      xy += euclid(a, b);
    }
  }
  double xx = 0.0;
  for (const auto& a : x) {
    for (const auto& b : x) {
      xx += euclid(a, b);
    }
  }
  double yy = 0.0;
  for (const auto& a : y) {
    for (const auto& b : y) {
      yy += euclid(a, b);
    }
  }
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  return 2.0 * xy / (nx * ny) - xx / (nx * nx) - yy / (ny * ny);
}

double energy_test_pvalue(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                          std::size_t permutations, RngStream& rng) {
  if (x.empty() || y.empty()) {
    throw EmptyReference("energy_test_pvalue: empty sample");
  }
  std::vector<std::vector<double>> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::size_t total = pooled.size();
  std::vector<double> dist(total * total);
  for (std::size_t a = 0; a < total; ++a) {
    for (std::size_t b = 0; b < total; ++b) {
      dist[a * total + b] = euclid(pooled[a], pooled[b]);
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  const double observed = energy_from_matrix(dist, total, order, x.size());
  std::size_t at_least = 0;
  for (std::size_t p = 0; p < permutations; ++p) {
    std::shuffle(order.begin(), order.end(), rng);
    if (energy_from_matrix(dist, total, order, x.size()) >= observed) {
      ++at_least;
    }
  }
  return static_cast<double>(at_least + 1) / static_cast<double>(permutations + 1);
}

std::vector<double> toy_modes(double y_obs) {
  auto f = [y_obs](double t) { return toy_hf_mean(t) - y_obs; };
  std::vector<double> roots;
  const std::vector<double> grid = uniform_grid(-2.0, 2.0, 40001);
  for (std::size_t j = 1; j < grid.size(); ++j) {
    double a = grid[j - 1];
    double b = grid[j];
    double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) {
      roots.push_back(a);
      continue;
    }
    if (fa * fb > 0.0) {
      continue;
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = f(mid);
      if (fa * fm <= 0.0) {
        b = mid;
      } else {
        a = mid;
        fa = fm;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  if (roots.empty()) {
    // y below the mean curve everywhere: use its minimizers instead
    double best = kInfinity;
    for (const double t : grid) {
      best = std::min(best, std::abs(f(t)));
    }
    for (const double t : grid) {
      if (std::abs(f(t)) <= best + 1e-12) {
        roots.push_back(t);
      }
    }
  }
  return roots;
}

namespace {

std::size_t nearest_mode(double theta, std::span<const double> modes) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < modes.size(); ++m) {
    if (std::abs(theta - modes[m]) < std::abs(theta - modes[best])) {
      best = m;
    }
  }
  return best;
}

}  // namespace

std::vector<ModeSummary> mode_summaries(std::span<const ParticleState> particles, std::span<const double> weights,
                                        std::span<const double> modes) {
  std::vector<std::vector<double>> values(modes.size());
  std::vector<std::vector<double>> w(modes.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (weights[i] <= 0.0) {
      continue;
    }
    const std::size_t m = nearest_mode(particles[i].theta.at(0), modes);
    values[m].push_back(particles[i].theta[0]);
    w[m].push_back(weights[i]);
  }
  std::vector<ModeSummary> out(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    out[m].mode = modes[m];
    out[m].mass = std::accumulate(w[m].begin(), w[m].end(), 0.0);
    out[m].iqr = w[m].empty() ? std::numeric_limits<double>::quiet_NaN()
                              : weighted_quantile(values[m], w[m], 0.75) - weighted_quantile(values[m], w[m], 0.25);
  }
  return out;
}

double mass_near_modes(std::span<const ParticleState> particles, std::span<const double> weights,
                       std::span<const double> modes, double radius) {
  double mass = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    total += weights[i];
    const double theta = particles[i].theta.at(0);
    if (std::abs(theta - modes[nearest_mode(theta, modes)]) <= radius) {
      mass += weights[i];
    }
  }
  return total > 0.0 ? mass / total : 0.0;
}

WeightedMoments weighted_moments(std::span<const ParticleState> particles, std::span<const double> weights) {
  const std::vector<double> w = normalize_weights(weights);
  const std::size_t d = particles.front().theta.size();
  WeightedMoments out;
  out.mean.assign(d, 0.0);
  out.std_error.assign(d, 0.0);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      out.mean[c] += w[i] * particles[i].theta[c];
    }
  }
  const double n_eff = ess(w);
  for (std::size_t c = 0; c < d; ++c) {
    double var = 0.0;
    for (std::size_t i = 0; i < particles.size(); ++i) {
      const double diff = particles[i].theta[c] - out.mean[c];
      var += w[i] * diff * diff;
    }
    out.std_error[c] = std::sqrt(var / n_eff);
  }
  return out;
}

}  // namespace mfabc
