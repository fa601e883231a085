#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/distributions.hpp"
#include "mfabc/simulators.hpp"

namespace mfabc {

double normal_cdf(double x) noexcept;

/// n equally spaced points from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

/// Trapezoid integral of f sampled on an increasing grid.
double trapezoid(std::span<const double> grid, std::span<const double> f);

/// P(distance(x, y) < eps) for x ~ N(mean, 0.2^2): the toy ABC likelihood.
double toy_acceptance_probability(double mean, double y_obs, double eps,
                                  ToyDistance distance = ToyDistance::kSquared) noexcept;
/// 1 - (1 - p)^n_lf: probability that a batch of LF simulations passes.
double prefilter_survival(double p_lf, std::size_t n_lf) noexcept;

/// ABC posterior density of the toy model (uniform prior on the grid's range),
/// normalized over the grid by the trapezoid rule.
std::vector<double> toy_exact_abc_posterior(double y_obs, double eps, std::span<const double> grid,
                                            ToyDistance distance = ToyDistance::kSquared);

/// Density proportional to prior * p_eps * (1 - (1 - p~_eps_aux)^n_lf), normalized on the grid.
std::vector<double> maps_exact_posterior(double y_obs, double eps, double eps_aux, std::size_t n_lf,
                                         std::span<const double> grid, ToyDistance distance = ToyDistance::kSquared);

/// Same target on a finite support with a uniform prior; returns probabilities.
std::vector<double> discrete_maps_posterior(double y_obs, double eps, double eps_aux, std::size_t n_lf,
                                            std::span<const double> support, ToyDistance distance = ToyDistance::kSquared);

/// Weighted empirical pmf of scalar particles on a finite support.
std::vector<double> empirical_pmf(std::span<const ParticleState> particles, std::span<const double> weights,
                                  const GridPrior& support);

double total_variation(std::span<const double> p, std::span<const double> q);

/// sum p log(p / q) over bins with p > 0 where p is the weighted histogram of
/// scalar samples on `bins` equal bins over [lo, hi] and q the bin masses of
/// a reference density given on `grid`. Samples outside [lo, hi] are dropped.
double kl_divergence_binned(std::span<const double> samples, std::span<const double> weights,
                            std::span<const double> grid, std::span<const double> reference_density, double lo,
                            double hi, std::size_t bins = 200);

/// k-nearest-neighbour estimate of KL(P || Q) from samples x ~ P and y ~ Q
/// (rows of dimension d). Coordinates are scaled by the reference standard
/// deviations; zero-distance neighbours (duplicates) are skipped. Throws
/// EmptyReference.
double kl_divergence_knn(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                         std::size_t k = 5);

/// Equal-weight rows drawn from a weighted ensemble by systematic resampling.
std::vector<std::vector<double>> resampled_rows(std::span<const ParticleState> particles,
                                                std::span<const double> weights, std::size_t count, RngStream& rng);

struct Prop2Check {
  double a_lf = 0.0;
  double l1_distance = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Quadrature check of the L1 error bound of the pre-filtered toy posterior.
/// Throws AssumptionViolated when the pre-filter removes (almost) all mass.
Prop2Check verify_prop2_bound(double y_obs, double eps, double eps_aux, std::size_t n_lf,
                              std::span<const double> grid, ToyDistance distance = ToyDistance::kSquared);

/// Expected fraction of prior draws the toy LF pre-filter rejects, by quadrature.
double toy_prefilter_rate(double y_obs, double eps_aux, std::size_t n_lf, std::span<const double> grid,
                          ToyDistance distance = ToyDistance::kSquared);

struct RateEstimate {
  double rate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo pre-filter rate: fraction of prior draws whose n_lf LF
/// distances are all >= eps_aux.
RateEstimate prefilter_rate_mc(const FidelityPair& pair, const Prior& prior, double eps_aux, std::size_t n_lf,
                               std::size_t draws, std::uint64_t seed, unsigned threads = 1);

struct McmcReferenceConfig {
  std::size_t chains = 10;
  std::size_t iterations = 50000;
  /// Fraction of each chain discarded as burn-in.
  double burn_in = 0.2;
  std::size_t thin = 1;
  std::size_t n_sims = 10;
  double eps = 0.1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct McmcReferenceResult {
  std::vector<std::vector<double>> samples;
  double accept_rate = 0.0;
  std::uint64_t hf_calls = 0;
};

/// Long ABC-MCMC chains at a fixed tolerance using HF simulations only.
/// Chain c starts from starts[c % starts.size()], which must pass at eps.
/// The kernel is used as given (no adaptation).
McmcReferenceResult run_abc_mcmc(const McmcReferenceConfig& config, const FidelityPair& pair, const Prior& prior,
                                 const ProposalKernel& kernel, const std::vector<ParticleState>& starts);

/// Energy distance between two samples of scalar or vector rows.
double energy_distance(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y);

/// Permutation p-value of the energy-distance two-sample test.
double energy_test_pvalue(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
                          std::size_t permutations, RngStream& rng);

/// Roots of the toy HF mean 4 t^2 + 0.3 cos(5 pi t) = y_obs on [-2, 2].
std::vector<double> toy_modes(double y_obs);

struct ModeSummary {
  double mode = 0.0;
  /// Interquartile width of the particles closest to this mode.
  double iqr = 0.0;
  double mass = 0.0;
};

/// Assigns each scalar particle to its nearest mode and reports per-mode
/// weighted interquartile widths, plus the total weight within `radius` of
/// the nearest mode.
std::vector<ModeSummary> mode_summaries(std::span<const ParticleState> particles, std::span<const double> weights,
                                        std::span<const double> modes);
double mass_near_modes(std::span<const ParticleState> particles, std::span<const double> weights,
                       std::span<const double> modes, double radius);

/// Weighted mean and standard error (from the ESS) of each coordinate.
struct WeightedMoments {
  std::vector<double> mean;
  std::vector<double> std_error;
};
WeightedMoments weighted_moments(std::span<const ParticleState> particles, std::span<const double> weights);

}  // namespace mfabc
