#include "mfabc/abc_is.hpp"

#include <string>

#include "mfabc/errors.hpp"
#include "mfabc/parallel.hpp"

namespace mfabc {

void IsConfig::validate() const {
  if (particles < 1) {
    throw Error("IsConfig.particles must be >= 1");
  }
  if (n_lf < 1) {
    throw Error("IsConfig.n_lf must be >= 1");
  }
  if (n_hf < 1) {
    throw Error("IsConfig.n_hf must be >= 1");
  }
  if (!(eps > 0.0)) {
    throw Error("IsConfig.eps must be > 0");
  }
  if (!(eps_lf > 0.0)) {
    throw Error("IsConfig.eps_lf must be > 0");
  }
}

namespace {

double density_ratio(std::span<const double> theta, const Prior& prior, const Distribution& proposal) {
  const double q = proposal.density(theta);
  if (!(q > 0.0)) {
    throw ZeroProposalDensity("proposal density is zero at a sampled parameter");
  }
  return prior.density(theta) / q;
}

}  // namespace

ImportanceWeight lf_weight(std::span<const double> theta, std::span<const double> lf_distances, double eps_lf,
                           const Prior& prior, const Distribution& proposal) {
  return {density_ratio(theta, prior, proposal), count_below(lf_distances, eps_lf)};
}

ImportanceWeight hf_weight_update(const ImportanceWeight& lf, std::span<const double> lf_distances, double eps_lf,
                                  std::span<const double> hf_distances, double eps) {
  const std::size_t lf_pass = count_below(lf_distances, eps_lf);
  if (lf_pass == 0 || lf.count != lf_pass) {
    throw Error("hf_weight_update: LF weight must be positive and match the LF distances");
  }
  const std::size_t hf_pass = count_below(hf_distances, eps);
  return {lf.ratio, lf.count * hf_pass / lf_pass};
}

double hf_weight_update(double lf_weight, std::span<const double> lf_distances, double eps_lf,
                        std::span<const double> hf_distances, double eps) {
  const std::size_t lf_pass = count_below(lf_distances, eps_lf);
  if (lf_pass == 0 || !(lf_weight > 0.0)) {
    throw Error("hf_weight_update: LF weight must be positive");
  }
  return lf_weight * static_cast<double>(count_below(hf_distances, eps)) / static_cast<double>(lf_pass);
}

namespace {

IsResult run_is(const IsConfig& config, const FidelityPair& pair, const Prior& prior, const Distribution& proposal,
                bool prefilter) {
  config.validate();
  const std::size_t n = config.particles;
  IsResult result;
  result.ensemble.particles.resize(n);
  result.raw_weights.resize(n);
  result.density_ratios.resize(n);
  std::vector<char> survived(n, 0);
  std::vector<std::uint64_t> hf_calls(n, 0);
  std::vector<std::uint64_t> lf_calls(n, 0);

  parallel_for(n, config.threads, [&](std::size_t i) {
    const RngStream item = RngStream::for_item(config.seed, StreamTag::kInit, 0, i);
    RngStream draw = item.child(StreamTag::kInit, 0);
    ParticleState& p = result.ensemble.particles[i];
    p.theta = proposal.sample(draw);
    ImportanceWeight w{density_ratio(p.theta, prior, proposal), 0};
    result.density_ratios[i] = w.ratio;
    if (prefilter) {
      p.set_lf_distances(pair.lf_distances(p.theta, item, config.n_lf));
      lf_calls[i] = config.n_lf;
      w = lf_weight(p.theta, p.lf_distances, config.eps_lf, prior, proposal);
      if (w.value() > 0.0) {
        survived[i] = 1;
        p.hf_distances = pair.hf_distances(p.theta, item, config.n_hf);
        hf_calls[i] = config.n_hf;
        w = hf_weight_update(w, p.lf_distances, config.eps_lf, p.hf_distances, config.eps);
      }
    } else {
      survived[i] = 1;
      p.hf_distances = pair.hf_distances(p.theta, item, config.n_hf);
      hf_calls[i] = config.n_hf;
      w.count = p.hf_passes(config.eps);
    }
    result.raw_weights[i] = w;
  });

  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = result.raw_weights[i].value();
    result.hf_calls += hf_calls[i];
    result.lf_calls += lf_calls[i];
  }
  result.survived_prefilter.assign(survived.begin(), survived.end());
  result.ensemble.weights = normalize_weights(weights);
  result.ensemble.normalized = true;
  return result;
}

}  // namespace

IsResult run_prefilter_is(const IsConfig& config, const FidelityPair& pair, const Prior& prior,
                          const Distribution& proposal) {
  return run_is(config, pair, prior, proposal, true);
}

IsResult run_abc_is(const IsConfig& config, const FidelityPair& pair, const Prior& prior,
                    const Distribution& proposal) {
  return run_is(config, pair, prior, proposal, false);
}

}  // namespace mfabc
