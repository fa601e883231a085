#include "mfabc/asmc.hpp"

#include <chrono>
#include <string>

#include "mfabc/errors.hpp"
#include "mfabc/parallel.hpp"

namespace mfabc {

void AsmcConfig::validate() const {
  if (particles < 1) {
    throw Error("AsmcConfig.particles must be >= 1");
  }
  if (n_sims < 1) {
    throw Error("AsmcConfig.n_sims must be >= 1");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error("AsmcConfig.alpha must lie in (0, 1]");
  }
  if (!(eps_target > 0.0)) {
    throw Error("AsmcConfig.eps_target must be > 0");
  }
  if (!(ess_fraction >= 0.0 && ess_fraction <= 1.0)) {
    throw Error("AsmcConfig.ess_fraction must lie in [0, 1]");
  }
  if (moves_per_iteration < 1) {
    throw Error("AsmcConfig.moves_per_iteration must be >= 1");
  }
}

double select_threshold(std::span<const ParticleState> particles, std::span<const double> prev_weights, double alpha,
                        double eps_prev, double eps_target) {
  std::vector<double> keys(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    keys[i] = particles[i].min_hf_distance();
  }
  const double eps = solve_active_threshold(keys, prev_weights, alpha, eps_prev);
  return eps < eps_target ? eps_target : eps;
}

std::vector<double> reweight(std::span<const double> prev_weights, std::span<const ParticleState> particles,
                             double eps_new, double eps_prev) {
  if (prev_weights.size() != particles.size()) {
    throw LengthMismatch("reweight: weights and particles differ in length");
  }
  std::vector<double> w(prev_weights.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (prev_weights[i] <= 0.0) {
      continue;
    }
    const std::size_t den = particles[i].hf_passes(eps_prev);
    if (den == 0) {
      throw Error("reweight: particle " + std::to_string(i) + " has positive weight but no pass at the previous tolerance");
    }
    w[i] = prev_weights[i] * static_cast<double>(particles[i].hf_passes(eps_new)) / static_cast<double>(den);
  }
  return normalize_weights(w);
}

MoveOutcome mh_move(const ParticleState& state, double eps, const Prior& prior, const ProposalKernel& kernel,
                    const FidelityPair& pair, std::size_t n_sims, const RngStream& item) {
  MoveOutcome out{state};
  RngStream rng = item.child(StreamTag::kMove, 0);
  ParameterVector proposal = kernel.propose(state.theta, rng);
  const double u = rng.uniform();
  const double prior_new = prior.density(proposal);
  if (prior_new <= 0.0) {
    return out;
  }
  std::vector<double> distances = pair.hf_distances(proposal, item, n_sims);
  out.hf_calls = n_sims;
  const std::size_t pass_new = count_below(distances, eps);
  if (pass_new == 0) {
    return out;
  }
  const std::size_t pass_old = state.hf_passes(eps);
  const double numerator = prior_new * static_cast<double>(pass_new) * kernel.density(state.theta, proposal);
  const double denominator =
      prior.density(state.theta) * static_cast<double>(pass_old) * kernel.density(proposal, state.theta);
  if (denominator <= 0.0 || u < numerator / denominator) {
    out.state.theta = std::move(proposal);
    out.state.hf_distances = std::move(distances);
    out.accepted = true;
  }
  return out;
}

SamplerResult run_asmc(const AsmcConfig& config, const FidelityPair& pair, const Prior& prior, ProposalKernel& kernel) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const std::size_t n = config.particles;

  SamplerResult result;
  WeightedEnsemble& ens = result.ensemble;
  ens.particles.resize(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    const RngStream item = RngStream::for_item(config.seed, StreamTag::kInit, 0, i);
    RngStream draw = item.child(StreamTag::kInit, 0);
    ens.particles[i].theta = prior.sample(draw);
    ens.particles[i].hf_distances = pair.hf_distances(ens.particles[i].theta, item, config.n_sims);
  });
  ens.weights.assign(n, 1.0 / static_cast<double>(n));
  ens.normalized = true;
  result.hf_calls = n * config.n_sims;

  TraceRow init;
  init.ess = static_cast<double>(n);
  init.pa = 1.0;
  init.hf_calls = result.hf_calls;
  init.wall_time = elapsed();
  result.trace.rows.push_back(init);

  double eps_prev = kInfinity;
  for (std::size_t t = 1;; ++t) {
    if (t > config.iteration_cap) {
      throw IterationCap("run_asmc: tolerance " + std::to_string(eps_prev) + " still above target after " +
                         std::to_string(config.iteration_cap) + " iterations");
    }
    TraceRow row;
    row.iteration = t;
    const double eps = select_threshold(ens.particles, ens.weights, config.alpha, eps_prev, config.eps_target);
    ens.weights = reweight(ens.weights, ens.particles, eps, eps_prev);
    ens.generation = t;
    row.epsilon = eps;

    if (ess(ens.weights) < config.ess_fraction * static_cast<double>(n)) {
      RngStream rng = RngStream::for_item(config.seed, StreamTag::kResample, t, 0);
      ens = resample(ens, rng, config.resampling);
      ens.generation = t;
      row.resampled = true;
    }
    kernel.adapt(ens.particles, ens.weights);

    std::vector<std::uint64_t> hf(n, 0);
    std::vector<std::uint64_t> accepted(n, 0);
    std::vector<std::uint64_t> attempted(n, 0);
    parallel_for(n, config.threads, [&](std::size_t i) {
      if (ens.weights[i] <= 0.0) {
        return;
      }
      const RngStream item = RngStream::for_item(config.seed, StreamTag::kMove, t, i);
      for (std::size_t m = 0; m < config.moves_per_iteration; ++m) {
        MoveOutcome mv = mh_move(ens.particles[i], eps, prior, kernel, pair, config.n_sims, item.child(StreamTag::kMove, m));
        hf[i] += mv.hf_calls;
        accepted[i] += mv.accepted ? 1 : 0;
        attempted[i] += 1;
        ens.particles[i] = std::move(mv.state);
      }
    });
    std::uint64_t n_acc = 0;
    std::uint64_t n_try = 0;
    for (std::size_t i = 0; i < n; ++i) {
      result.hf_calls += hf[i];
      n_acc += accepted[i];
      n_try += attempted[i];
    }
    row.mh_accept_rate = n_try > 0 ? static_cast<double>(n_acc) / static_cast<double>(n_try) : 0.0;
    row.ess = ess(ens.weights);
    row.pa = proportion_active(ens.weights);
    row.hf_calls = result.hf_calls;
    row.wall_time = elapsed();
    result.trace.rows.push_back(row);

    eps_prev = eps;
    if (eps <= config.eps_target) {
      break;
    }
  }
  result.wall_time = elapsed();
  return result;
}

}  // namespace mfabc
