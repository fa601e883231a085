#include "mfabc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mfabc/abc_is.hpp"
#include "mfabc/asmc.hpp"
#include "mfabc/diagnostics.hpp"
#include "mfabc/errors.hpp"
#include "mfabc/io.hpp"
#include "mfabc/maps.hpp"
#include "mfabc/parallel.hpp"
#include "mfabc/suitability.hpp"

namespace fs = std::filesystem;

namespace mfabc {

namespace {

ResamplingScheme scheme_of(const std::string& name) {
  return name == "multinomial" ? ResamplingScheme::kMultinomial : ResamplingScheme::kSystematic;
}

SamplerResult from_is(IsResult is) {
  SamplerResult out;
  out.ensemble = std::move(is.ensemble);
  out.hf_calls = is.hf_calls;
  out.lf_calls = is.lf_calls;
  TraceRow row;
  row.ess = ess(out.ensemble.weights);
  row.pa = proportion_active(out.ensemble.weights);
  row.hf_calls = out.hf_calls;
  row.lf_calls = out.lf_calls;
  row.prefilter_rejects = static_cast<std::uint64_t>(
      std::count(is.survived_prefilter.begin(), is.survived_prefilter.end(), false));
  out.trace.rows.push_back(row);
  return out;
}

SamplerResult run_reference_chains(const SamplerSpec& s, const Model& model, std::uint64_t seed, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  AsmcConfig pilot;
  pilot.particles = s.start_particles;
  pilot.n_sims = s.n_hf;
  pilot.alpha = s.alpha;
  pilot.eps_target = s.eps_target;
  pilot.ess_fraction = s.ess_fraction;
  pilot.iteration_cap = s.iteration_cap;
  pilot.seed = mix64(seed);
  pilot.threads = threads;
  auto pilot_kernel = model.make_kernel();
  const SamplerResult warm = run_asmc(pilot, model.pair, *model.prior, *pilot_kernel);

  RngStream pick = RngStream::for_item(seed, StreamTag::kChain, 0, s.chains);
  const auto idx = resample_indices(warm.ensemble.weights, s.chains, pick, ResamplingScheme::kSystematic);
  std::vector<ParticleState> starts;
  for (const std::size_t i : idx) {
    starts.push_back(warm.ensemble.particles[i]);
  }
  std::unique_ptr<ProposalKernel> kernel;
  if (model.id == ModelId::kDiscreteToy) {
    kernel = model.make_kernel();
  } else {
    const std::size_t d = model.prior->dimension();
    kernel = std::make_unique<GaussianRandomWalk>(d, 2.38 * 2.38 / static_cast<double>(d));
    kernel->adapt(warm.ensemble.particles, warm.ensemble.weights);
  }
  McmcReferenceConfig mc;
  mc.chains = s.chains;
  mc.iterations = s.iterations;
  mc.burn_in = s.burn_in;
  mc.thin = s.thin;
  mc.n_sims = s.n_hf;
  mc.eps = s.eps_target;
  mc.seed = seed;
  mc.threads = threads;
  const McmcReferenceResult chains = run_abc_mcmc(mc, model.pair, *model.prior, *kernel, starts);

  SamplerResult out;
  out.ensemble.particles.resize(chains.samples.size());
  for (std::size_t i = 0; i < chains.samples.size(); ++i) {
    out.ensemble.particles[i].theta = chains.samples[i];
  }
  out.ensemble.weights.assign(chains.samples.size(), 1.0 / static_cast<double>(chains.samples.size()));
  out.ensemble.normalized = true;
  out.hf_calls = warm.hf_calls + chains.hf_calls;
  TraceRow row;
  row.epsilon = s.eps_target;
  row.ess = static_cast<double>(chains.samples.size());
  row.pa = 1.0;
  row.hf_calls = out.hf_calls;
  row.mh_accept_rate = chains.accept_rate;
  out.trace.rows.push_back(row);
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.trace.rows.back().wall_time = out.wall_time;
  return out;
}

SamplerResult run_sampler(const SamplerSpec& s, const Model& model, std::uint64_t seed, unsigned threads) {
  if (s.name == "asmc") {
    AsmcConfig c;
    c.particles = s.particles;
    c.n_sims = s.n_hf;
    c.alpha = s.alpha;
    c.eps_target = s.eps_target;
    c.ess_fraction = s.ess_fraction;
    c.moves_per_iteration = s.moves;
    c.iteration_cap = s.iteration_cap;
    c.resampling = scheme_of(s.resampling);
    c.seed = seed;
    c.threads = threads;
    auto kernel = model.make_kernel();
    return run_asmc(c, model.pair, *model.prior, *kernel);
  }
  if (s.name == "maps") {
    MapsConfig c;
    c.particles = s.particles;
    c.n_hf = s.n_hf;
    c.n_lf = s.n_lf;
    c.alpha = s.alpha;
    c.alpha_lf = s.alpha_lf;
    c.a_lf = s.a_lf;
    c.eps_target = s.eps_target;
    c.ess_fraction = s.ess_fraction;
    c.moves_per_iteration = s.moves;
    c.iteration_cap = s.iteration_cap;
    c.defer_initial_hf = s.defer_initial_hf;
    c.resampling = scheme_of(s.resampling);
    c.seed = seed;
    c.threads = threads;
    auto kernel = model.make_kernel();
    return run_maps(c, model.pair, *model.prior, *kernel);
  }
  if (s.name == "is" || s.name == "abc-is") {
    IsConfig c;
    c.particles = s.particles;
    c.n_lf = s.n_lf;
    c.n_hf = s.n_hf;
    c.eps = s.eps_target;
    c.eps_lf = s.eps_lf;
    c.seed = seed;
    c.threads = threads;
    const auto start = std::chrono::steady_clock::now();
    SamplerResult out = from_is(s.name == "is" ? run_prefilter_is(c, model.pair, *model.prior, *model.prior)
                                               : run_abc_is(c, model.pair, *model.prior, *model.prior));
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.trace.rows.back().wall_time = out.wall_time;
    return out;
  }
  return run_reference_chains(s, model, seed, threads);
}

Json to_json_vector(const std::vector<double>& v) {
  Json arr = Json::array();
  for (const double x : v) {
    arr.push_back(std::isfinite(x) ? Json(x) : Json(format_double(x)));
  }
  return arr;
}

Json number_or_string(double x) { return std::isfinite(x) ? Json(x) : Json(format_double(x)); }

void add_accuracy(const RunConfig& config, const Model& model, const SamplerResult& result, std::uint64_t seed,
                  Json& summary) {
  const ReferenceSpec& ref = config.reference;
  const WeightedEnsemble& ens = result.ensemble;
  if (ref.kind == "analytic" && model.id == ModelId::kToy) {
    const std::vector<double> grid = uniform_grid(-2.0, 2.0, 2001);
    const std::vector<double> density = toy_exact_abc_posterior(config.model.y_obs, config.sampler.eps_target, grid, toy_distance(config.model));
    std::vector<double> theta(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) {
      theta[i] = ens.particles[i].theta[0];
    }
    summary["kl"] = number_or_string(kl_divergence_binned(theta, ens.weights, grid, density, -2.0, 2.0, 200));
    summary["kl_method"] = "binned-200 vs analytic ABC posterior";
  } else if (ref.kind == "analytic" && model.id == ModelId::kDiscreteToy) {
    const auto& grid = dynamic_cast<const GridPrior&>(*model.prior);
    const double eps_aux = config.sampler.name == "maps" ? result.trace.rows.back().eps_aux
                           : config.sampler.name == "is" ? config.sampler.eps_lf
                                                         : kInfinity;
    const std::vector<double> exact =
        discrete_maps_posterior(config.model.y_obs, config.sampler.eps_target, eps_aux, config.sampler.n_lf,
                                grid.points(), toy_distance(config.model));
    const std::vector<double> pmf = empirical_pmf(ens.particles, ens.weights, grid);
    double kl = 0.0;
    for (std::size_t j = 0; j < pmf.size(); ++j) {
      if (pmf[j] > 0.0) {
        kl += pmf[j] * std::log(pmf[j] / exact[j]);
      }
    }
    summary["kl"] = number_or_string(kl);
    summary["kl_method"] = "exact pmf on the support grid";
    summary["tv"] = total_variation(pmf, exact);
  } else if (ref.kind == "samples") {
    const CsvTable table = read_csv(ref.path);
    std::vector<std::vector<double>> reference(table.rows.size());
    std::vector<std::vector<double>> columns;
    for (const auto& name : model.parameter_names) {
      columns.push_back(table.column(name));
    }
    for (std::size_t i = 0; i < reference.size(); ++i) {
      for (const auto& col : columns) {
        reference[i].push_back(col[i]);
      }
    }
    RngStream rng = RngStream::for_item(seed, StreamTag::kDiagnostic, 0, 0);
    const auto rows = resampled_rows(ens.particles, ens.weights, ens.size(), rng);
    summary["kl"] = number_or_string(kl_divergence_knn(rows, reference, 5));
    summary["kl_method"] = "knn-5 vs reference samples";
  }
}

Json make_summary(const RunConfig& config, const ReplicateRun& run, std::size_t replicate, std::uint64_t seed) {
  const SamplerResult& r = run.result;
  Json s;
  s["method"] = config.sampler.name;
  s["model"] = config.model.name;
  if (run.model.id == ModelId::kToy || run.model.id == ModelId::kDiscreteToy) {
    s["y_obs"] = config.model.y_obs;
  }
  s["replicate"] = replicate;
  s["seed"] = seed;
  s["config_hash"] = config_hash(to_json(config));
  s["iterations"] = r.iterations();
  s["hf_calls"] = r.hf_calls;
  s["lf_calls"] = r.lf_calls;
  s["hf_counter"] = run.model.pair.hf->calls();
  s["lf_counter"] = run.model.pair.lf->calls();
  s["ess"] = ess(r.ensemble.weights);
  s["epsilon"] = number_or_string(r.trace.rows.back().epsilon);
  s["eps_aux"] = number_or_string(r.trace.rows.back().eps_aux);
  const WeightedMoments m = weighted_moments(r.ensemble.particles, r.ensemble.weights);
  s["posterior_mean"] = to_json_vector(m.mean);
  s["posterior_mean_se"] = to_json_vector(m.std_error);
  s["parameter_names"] = run.model.parameter_names;
  s["wall_time"] = r.wall_time;
  return s;
}

void write_json(const fs::path& path, const Json& json) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << json.dump(2) << '\n';
}

/// Removes the staging directory unless released.
class Staging {
 public:
  explicit Staging(const fs::path& target) : target_(target) {
    path_ = target_;
    path_ += ".partial";
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }

  [[nodiscard]] const fs::path& path() const noexcept { return path_; }

  /// Moves every staged entry into the target, replacing same-named entries.
  void commit() {
    fs::create_directories(target_);
    for (const auto& entry : fs::directory_iterator(path_)) {
      const fs::path dest = target_ / entry.path().filename();
      fs::remove_all(dest);
      fs::rename(entry.path(), dest);
    }
  }

 private:
  fs::path target_;
  fs::path path_;
};

std::vector<double> metric_values(const std::vector<Json>& summaries, const std::string& metric) {
  std::vector<double> values;
  for (const auto& s : summaries) {
    if (!s.contains(metric) || !s.at(metric).is_number()) {
      throw MetricUnavailable("metric '" + metric + "' is not available for method " +
                              s.value("method", std::string("?")));
    }
    values.push_back(s.at(metric).get<double>());
  }
  return values;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

ReplicateRun run_replicate(const RunConfig& config, std::size_t replicate, unsigned threads) {
  if (!config.has_sampler) {
    throw ConfigError("sampler: required section is missing");
  }
  const std::uint64_t seed = config.output.seed + replicate;
  ReplicateRun run;
  run.model = build_model(config.model);
  run.result = run_sampler(config.sampler, run.model, seed, threads);
  run.summary = make_summary(config, run, replicate, seed);
  add_accuracy(config, run.model, run.result, seed, run.summary);
  return run;
}

std::vector<Json> run_experiment(const RunConfig& config, const fs::path& out) {
  const std::size_t reps = config.output.replicates;
  const unsigned threads = config.output.threads;
  Staging staging(out);
  const Json expanded = to_json(config);
  Json manifest;
  manifest["config_hash"] = config_hash(expanded);
  manifest["seed"] = config.output.seed;
  manifest["replicates"] = reps;
  manifest["config"] = expanded;
  write_json(staging.path() / "manifest.json", manifest);

  std::vector<Json> summaries(reps);
  // Outputs do not depend on how threads are split, so spread them over
  // replicates when there are enough of those.
  const bool outer = reps >= threads && threads > 1;
  parallel_for(reps, outer ? threads : 1U, [&](std::size_t r) {
    ReplicateRun run = run_replicate(config, r, outer ? 1U : threads);
    const fs::path dir = staging.path() / ("replicate_" + std::to_string(r));
    fs::create_directories(dir);
    write_ensemble_csv(dir / "ensemble.csv", run.result.ensemble, run.model.parameter_names);
    write_trace_csv(dir / "trace.csv", run.result.trace);
    write_timing_csv(dir / "timing.csv", run.result.trace);
    write_json(dir / "summary.json", run.summary);
    summaries[r] = std::move(run.summary);
  });
  staging.commit();
  return summaries;
}

Json compare_experiments(const RunConfig& a, const RunConfig& b, const std::vector<std::string>& metrics,
                         const fs::path& out) {
  for (const auto& m : metrics) {
    if (m != "kl" && m != "ess" && m != "hf_calls" && m != "lf_calls" && m != "wall_time" && m != "iterations") {
      throw ConfigError("metrics: unknown metric '" + m + "'");
    }
    if (m == "kl" && (a.reference.kind == "none" || b.reference.kind == "none")) {
      throw MetricUnavailable("metric 'kl' needs a reference in both configs");
    }
  }
  const std::vector<Json> sa = run_experiment(a, out / "a");
  const std::vector<Json> sb = run_experiment(b, out / "b");

  std::ofstream rows(out / "comparison.csv", std::ios::binary);
  rows << "method,y_obs,kl,ess,hf_calls,wall_time,replicate\n";
  auto emit = [&](const std::vector<Json>& summaries) {
    for (const auto& s : summaries) {
      auto field = [&](const char* key) {
        return s.contains(key) && s.at(key).is_number() ? format_double(s.at(key).get<double>()) : std::string();
      };
      rows << s.at("method").get<std::string>() << ',' << field("y_obs") << ',' << field("kl") << ','
           << field("ess") << ',' << s.at("hf_calls").get<std::uint64_t>() << ',' << field("wall_time") << ','
           << s.at("replicate").get<std::size_t>() << '\n';
    }
  };
  emit(sa);
  emit(sb);

  Json report = Json::array();
  std::ofstream changes(out / "changes.csv", std::ios::binary);
  changes << "metric,mean_a,mean_b,percent_change\n";
  for (const auto& m : metrics) {
    const double mean_a = mean_of(metric_values(sa, m));
    const double mean_b = mean_of(metric_values(sb, m));
    const double pct = mean_a != 0.0 ? 100.0 * (mean_b - mean_a) / mean_a : (mean_b == 0.0 ? 0.0 : kInfinity);
    changes << m << ',' << format_double(mean_a) << ',' << format_double(mean_b) << ',' << format_double(pct) << '\n';
    report.push_back({{"metric", m}, {"mean_a", mean_a}, {"mean_b", mean_b}, {"percent_change", number_or_string(pct)}});
  }
  return report;
}

Json run_suitability(const RunConfig& config, const fs::path& out) {
  if (!config.has_suitability) {
    throw ConfigError("suitability: required section is missing");
  }
  const Model model = build_model(config.model);
  SuitabilityConfig c;
  c.samples = config.suitability.samples;
  c.kappa = config.suitability.kappa;
  c.n_lf = config.suitability.n_lf;
  c.n_hf = config.suitability.n_hf;
  c.eps = config.suitability.eps;
  c.seed = config.output.seed;
  c.threads = config.output.threads;
  const SuitabilityReport r = assess_suitability(c, model.pair, *model.prior, *model.prior);
  Json j;
  j["epsilon0"] = r.epsilon0;
  j["epsilon_tilde0"] = r.epsilon_tilde0;
  j["E"] = r.e;
  j["kappa"] = r.kappa;
  j["N0"] = r.samples;
  j["hf_calls"] = r.hf_calls;
  j["lf_calls"] = r.lf_calls;
  j["hf_accepted"] = r.hf_accepted;
  j["prefilter_passed"] = r.prefilter_passed;
  j["true_positives"] = r.true_positives;
  j["E_lower_bound"] = r.lower_bound();
  j["E_upper_bound"] = r.upper_bound();
  j["note"] = "lower E indicates better consistency between the LF and HF models";
  fs::create_directories(out);
  write_json(out / "suitability.json", j);
  return j;
}

Json run_verify(double y_obs, ToyDistance distance, std::uint64_t seed, unsigned threads, const fs::path& out) {
  const std::vector<double> grid = uniform_grid(-2.0, 2.0, 2001);
  const std::size_t n_lf = 20;
  Json prop2 = Json::array();
  bool all_hold = true;
  for (const double eps : {0.05, 0.1, 0.2, 0.5}) {
    for (const double eps_aux : {0.02, 0.05, 0.1, 0.3, 1.0}) {
      const Prop2Check c = verify_prop2_bound(y_obs, eps, eps_aux, n_lf, grid, distance);
      all_hold = all_hold && c.holds;
      prop2.push_back({{"eps", eps},
                       {"eps_aux", eps_aux},
                       {"a_lf", c.a_lf},
                       {"l1_distance", c.l1_distance},
                       {"bound", c.bound},
                       {"holds", c.holds}});
    }
  }
  const Model model = make_toy_model(y_obs, distance);
  Json rates = Json::array();
  bool all_agree = true;
  for (const double eps_aux : {0.01, 0.05, 0.1, 0.5, 2.0}) {
    const double quad = toy_prefilter_rate(y_obs, eps_aux, n_lf, grid, distance);
    const RateEstimate mc = prefilter_rate_mc(model.pair, *model.prior, eps_aux, n_lf, 100000, seed, threads);
    const double se = std::max(mc.std_error, 1e-12);
    const bool agree = std::abs(quad - mc.rate) <= 3.0 * se || std::abs(quad - mc.rate) < 1e-9;
    all_agree = all_agree && agree;
    rates.push_back({{"eps_aux", eps_aux},
                     {"quadrature", quad},
                     {"monte_carlo", mc.rate},
                     {"std_error", mc.std_error},
                     {"agree", agree}});
  }
  Json report;
  report["y_obs"] = y_obs;
  report["n_lf"] = n_lf;
  report["error_bound"] = prop2;
  report["error_bound_holds"] = all_hold;
  report["prefilter_rate"] = rates;
  report["prefilter_rate_agrees"] = all_agree;
  fs::create_directories(out);
  write_json(out / "verify.json", report);
  return report;
}

void generate_observed(const RunConfig& config, const fs::path& out) {
  const Model model = build_model(config.model);
  CsvTable table;
  for (const auto& series : model.observed) {
    table.header.push_back(series.name);
  }
  const std::size_t rows = model.observed.front().values.size();
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> row;
    for (const auto& series : model.observed) {
      row.push_back(series.values.at(i));
    }
    table.rows.push_back(std::move(row));
  }
  fs::create_directories(out);
  write_csv(out / "observed.csv", table);
}

}  // namespace mfabc
