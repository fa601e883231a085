#include "mfabc/maps.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "mfabc/errors.hpp"
#include "mfabc/parallel.hpp"

namespace mfabc {

void MapsConfig::validate() const {
  if (particles < 1) {
    throw Error("MapsConfig.particles must be >= 1");
  }
  if (n_hf < 1 || n_lf < 1) {
    throw Error("MapsConfig.n_hf and n_lf must be >= 1");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error("MapsConfig.alpha must lie in (0, 1]");
  }
  if (!(alpha_lf > 0.0 && alpha_lf <= 1.0)) {
    throw Error("MapsConfig.alpha_lf must lie in (0, 1]");
  }
  if (!(a_lf > 0.0 && a_lf < 1.0)) {
    throw Error("MapsConfig.a_lf must lie in (0, 1)");
  }
  if (!(eps_target > 0.0)) {
    throw Error("MapsConfig.eps_target must be > 0");
  }
  if (!(ess_fraction >= 0.0 && ess_fraction <= 1.0)) {
    throw Error("MapsConfig.ess_fraction must lie in [0, 1]");
  }
  if (moves_per_iteration < 1) {
    throw Error("MapsConfig.moves_per_iteration must be >= 1");
  }
}

double critical_value(std::span<const ParticleState> particles, std::span<const double> weights, double eps,
                      double eps_target, double a_lf) {
  if (particles.size() != weights.size()) {
    throw LengthMismatch("critical_value: weights and particles differ in length");
  }
  std::vector<double> w(particles.size(), 0.0);
  std::vector<double> lf_min(particles.size());
  bool any = false;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    lf_min[i] = particles[i].min_lf_distance;
    if (weights[i] <= 0.0 || !particles[i].has_hf()) {
      continue;
    }
    const std::size_t den = particles[i].hf_passes(eps);
    if (den == 0) {
      continue;
    }
    w[i] = weights[i] * static_cast<double>(particles[i].hf_passes(eps_target)) / static_cast<double>(den);
    any = any || w[i] > 0.0;
  }
  if (!any) {
    return 0.0;
  }
  return weighted_quantile(lf_min, w, 1.0 - a_lf);
}

AuxThreshold select_aux_threshold(std::span<const ParticleState> particles, std::span<const double> prev_weights,
                                  double alpha_lf, double eps_aux_prev, double lower_bound) {
  std::vector<double> keys(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    keys[i] = particles[i].min_lf_distance;
  }
  AuxThreshold out;
  out.raw = solve_active_threshold(keys, prev_weights, alpha_lf, eps_aux_prev);
  out.eps_aux = out.raw;
  if (out.raw < lower_bound) {
    out.eps_aux = lower_bound;
    out.clamp_bound = true;
  }
  std::vector<double> w(particles.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (prev_weights[i] > 0.0 && keys[i] < out.eps_aux) {
      w[i] = prev_weights[i];
    }
  }
  out.weights = normalize_weights(w);
  return out;
}

MoveOutcome pf_abc_mcmc_move(const ParticleState& state, double eps, double eps_aux, const Prior& prior,
                             const ProposalKernel& kernel, const FidelityPair& pair, std::size_t n_hf,
                             std::size_t n_lf, const RngStream& item, bool defer_hf) {
  MoveOutcome out{state};
  RngStream rng = item.child(StreamTag::kMove, 0);
  ParameterVector proposal = kernel.propose(state.theta, rng);
  const double u = rng.uniform();
  std::vector<double> lf = pair.lf_distances(proposal, item, n_lf);
  out.lf_calls = n_lf;
  if (!(min_distance(lf) < eps_aux)) {
    out.prefiltered = true;
    return out;
  }
  const double prior_new = prior.density(proposal);
  if (prior_new <= 0.0) {
    return out;
  }
  const bool skip_hf = defer_hf && std::isinf(eps);
  std::vector<double> hf;
  std::size_t pass_new = 1;
  std::size_t pass_old = 1;
  if (!skip_hf) {
    hf = pair.hf_distances(proposal, item, n_hf);
    out.hf_calls = n_hf;
    pass_new = count_below(hf, eps);
    if (pass_new == 0) {
      return out;
    }
    pass_old = state.has_hf() ? state.hf_passes(eps) : 0;
  }
  const double numerator = prior_new * static_cast<double>(pass_new) * kernel.density(state.theta, proposal);
  const double denominator =
      prior.density(state.theta) * static_cast<double>(pass_old) * kernel.density(proposal, state.theta);
  if (denominator <= 0.0 || u < numerator / denominator) {
    out.state.theta = std::move(proposal);
    out.state.hf_distances = std::move(hf);
    out.state.set_lf_distances(std::move(lf));
    out.accepted = true;
  }
  return out;
}

SamplerResult run_maps(const MapsConfig& config, const FidelityPair& pair, const Prior& prior, ProposalKernel& kernel) {
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
    ParticleState& p = ens.particles[i];
    p.theta = prior.sample(draw);
    p.set_lf_distances(pair.lf_distances(p.theta, item, config.n_lf));
    if (!config.defer_initial_hf) {
      p.hf_distances = pair.hf_distances(p.theta, item, config.n_hf);
    }
  });
  ens.weights.assign(n, 1.0 / static_cast<double>(n));
  ens.normalized = true;
  result.lf_calls = n * config.n_lf;
  result.hf_calls = config.defer_initial_hf ? 0 : n * config.n_hf;

  TraceRow init;
  init.eps_aux = kInfinity;
  init.eps_lower = 0.0;
  init.ess = static_cast<double>(n);
  init.pa = 1.0;
  init.hf_calls = result.hf_calls;
  init.lf_calls = result.lf_calls;
  init.wall_time = elapsed();
  result.trace.rows.push_back(init);

  double eps_prev = kInfinity;
  double eps_aux_prev = kInfinity;
  for (std::size_t t = 1;; ++t) {
    if (t > config.iteration_cap) {
      throw IterationCap("run_maps: tolerance " + std::to_string(eps_prev) + " still above target after " +
                         std::to_string(config.iteration_cap) + " iterations");
    }
    TraceRow row;
    row.iteration = t;

    const double lower = critical_value(ens.particles, ens.weights, eps_prev, config.eps_target, config.a_lf);
    AuxThreshold aux = select_aux_threshold(ens.particles, ens.weights, config.alpha_lf, eps_aux_prev, lower);
    row.eps_lower = lower;
    row.eps_aux = aux.eps_aux;
    row.clamp_bound = aux.clamp_bound;
    ens.weights = std::move(aux.weights);
    for (std::size_t i = 0; i < n; ++i) {
      if (ens.weights[i] > 0.0 && !(ens.particles[i].min_lf_distance < aux.eps_aux)) {
        throw Error("run_maps: active particle fails the auxiliary threshold");
      }
    }

    if (ess(ens.weights) < config.ess_fraction * static_cast<double>(n)) {
      RngStream rng = RngStream::for_item(config.seed, StreamTag::kResample, t, 0);
      ens = resample(ens, rng, config.resampling);
      row.resampled = true;
    }
    ens.generation = t;
    kernel.adapt(ens.particles, ens.weights);

    std::vector<std::uint64_t> hf(n, 0);
    std::vector<std::uint64_t> lf(n, 0);
    std::vector<std::uint64_t> prefiltered(n, 0);
    std::vector<std::uint64_t> accepted(n, 0);
    std::vector<std::uint64_t> attempted(n, 0);
    const bool deferred = config.defer_initial_hf && std::isinf(eps_prev);
    parallel_for(n, config.threads, [&](std::size_t i) {
      if (ens.weights[i] <= 0.0) {
        return;
      }
      const RngStream item = RngStream::for_item(config.seed, StreamTag::kMove, t, i);
      for (std::size_t m = 0; m < config.moves_per_iteration; ++m) {
        MoveOutcome mv = pf_abc_mcmc_move(ens.particles[i], eps_prev, aux.eps_aux, prior, kernel, pair, config.n_hf,
                                          config.n_lf, item.child(StreamTag::kMove, m), deferred);
        hf[i] += mv.hf_calls;
        lf[i] += mv.lf_calls;
        prefiltered[i] += mv.prefiltered ? 1 : 0;
        accepted[i] += mv.accepted ? 1 : 0;
        attempted[i] += 1;
        ens.particles[i] = std::move(mv.state);
      }
      if (!ens.particles[i].has_hf()) {
        const RngStream sim = RngStream::for_item(config.seed, StreamTag::kHfSim, t, i);
        ens.particles[i].hf_distances = pair.hf_distances(ens.particles[i].theta, sim, config.n_hf);
        hf[i] += config.n_hf;
      }
    });
    std::uint64_t n_acc = 0;
    std::uint64_t n_try = 0;
    for (std::size_t i = 0; i < n; ++i) {
      result.hf_calls += hf[i];
      result.lf_calls += lf[i];
      row.prefilter_rejects += prefiltered[i];
      n_acc += accepted[i];
      n_try += attempted[i];
    }
    row.mh_accept_rate = n_try > 0 ? static_cast<double>(n_acc) / static_cast<double>(n_try) : 0.0;

    double eps = select_threshold(ens.particles, ens.weights, config.alpha, eps_prev, config.eps_target);
    ens.weights = reweight(ens.weights, ens.particles, eps, eps_prev);
    row.epsilon = eps;
    row.ess = ess(ens.weights);
    row.pa = proportion_active(ens.weights);
    row.hf_calls = result.hf_calls;
    row.lf_calls = result.lf_calls;
    row.wall_time = elapsed();
    result.trace.rows.push_back(row);

    eps_prev = eps;
    eps_aux_prev = aux.eps_aux;
    if (eps <= config.eps_target) {
      break;
    }
  }
  result.wall_time = elapsed();
  return result;
}

}  // namespace mfabc
