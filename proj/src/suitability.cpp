#include "mfabc/suitability.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mfabc/errors.hpp"
#include "mfabc/parallel.hpp"

namespace mfabc {

void SuitabilityConfig::validate() const {
  if (samples < 1) {
    throw Error("SuitabilityConfig.samples must be >= 1");
  }
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw Error("SuitabilityConfig.kappa must lie in (0, 1)");
  }
  if (n_lf < 1 || n_hf < 1) {
    throw Error("SuitabilityConfig.n_lf and n_hf must be >= 1");
  }
  if (!(eps > 0.0)) {
    throw Error("SuitabilityConfig.eps must be > 0");
  }
}

SuitabilityReport assess_suitability(const SuitabilityConfig& config, const FidelityPair& pair, const Prior& prior,
                                     const Distribution& proposal) {
  config.validate();
  const std::size_t n = config.samples;
  std::vector<ParticleState> particles(n);
  std::vector<double> ratio(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    const RngStream item = RngStream::for_item(config.seed, StreamTag::kAssess, 0, i);
    RngStream draw = item.child(StreamTag::kInit, 0);
    ParticleState& p = particles[i];
    p.theta = proposal.sample(draw);
    const double q = proposal.density(p.theta);
    if (!(q > 0.0)) {
      throw ZeroProposalDensity("assess_suitability: proposal density is zero at a sampled parameter");
    }
    ratio[i] = prior.density(p.theta) / q;
    p.set_lf_distances(pair.lf_distances(p.theta, item, config.n_lf));
    p.hf_distances = pair.hf_distances(p.theta, item, config.n_hf);
  });

  SuitabilityReport report;
  report.kappa = config.kappa;
  report.samples = n;
  report.hf_calls = n * config.n_hf;
  report.lf_calls = n * config.n_lf;

  std::vector<double> keys(n);
  std::vector<double> support(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = particles[i].min_hf_distance();
    support[i] = ratio[i] > 0.0 ? 1.0 : 0.0;
  }
  if (std::none_of(support.begin(), support.end(), [](double s) { return s > 0.0; })) {
    throw NoAcceptedSamples("assess_suitability: every sample lies outside the prior support");
  }
  const double active = static_cast<double>(std::count(support.begin(), support.end(), 1.0));
  // PA is relative to all N0 samples, so rescale kappa to the in-support set.
  const double alpha = std::min(1.0, config.kappa * static_cast<double>(n) / active);
  double eps0 = kInfinity;
  try {
    eps0 = solve_active_threshold(keys, support, alpha, kInfinity);
  } catch (const NoActiveParticles& e) {
    throw NoAcceptedSamples(std::string("assess_suitability: ") + e.what());
  }
  if (std::isinf(eps0)) {
    // every in-support sample must stay active: take the largest realized key
    eps0 = std::nextafter(*std::max_element(keys.begin(), keys.end()), kInfinity);
  }
  eps0 = std::max(eps0, config.eps);
  report.epsilon0 = eps0;

  double eps_tilde0 = -kInfinity;
  std::vector<char> accepted(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (ratio[i] > 0.0 && particles[i].hf_passes(eps0) > 0) {
      accepted[i] = 1;
      ++report.hf_accepted;
      eps_tilde0 = std::max(eps_tilde0, particles[i].min_lf_distance);
    }
  }
  if (report.hf_accepted == 0) {
    throw NoAcceptedSamples("assess_suitability: no sample has a HF distance below epsilon0 = " +
                            std::to_string(eps0));
  }
  report.epsilon_tilde0 = eps_tilde0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& lf = particles[i].lf_distances;
    const bool pass = std::any_of(lf.begin(), lf.end(), [&](double d) { return d <= eps_tilde0; });
    if (pass) {
      ++report.prefilter_passed;
      if (accepted[i]) {
        ++report.true_positives;
      }
    } else if (accepted[i]) {
      throw Error("assess_suitability: HF-accepted sample fails the pre-screen");
    }
  }
  report.e = static_cast<double>(report.prefilter_passed) / ((1.0 - config.kappa) * static_cast<double>(n));
  return report;
}

}  // namespace mfabc
