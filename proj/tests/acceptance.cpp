// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion
// and exits non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mfabc/abc_is.hpp"
#include "mfabc/config.hpp"
#include "mfabc/diagnostics.hpp"
#include "mfabc/errors.hpp"
#include "mfabc/experiment.hpp"
#include "mfabc/suitability.hpp"

using namespace mfabc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

RunConfig load(const std::string& name) { return load_run_config(fs::path(MFABC_SOURCE_DIR) / "configs" / name); }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double std_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (const double x : v) {
    s += (x - m) * (x - m);
  }
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::vector<Json> replicates(const RunConfig& config, std::size_t count) {
  std::vector<Json> out;
  for (std::size_t r = 0; r < count; ++r) {
    out.push_back(run_replicate(config, r, 1).summary);
  }
  return out;
}

std::vector<double> column(const std::vector<Json>& runs, const std::string& key) {
  std::vector<double> v;
  for (const Json& s : runs) {
    v.push_back(s.at(key).get<double>());
  }
  return v;
}

std::vector<double> column(const std::vector<Json>& runs, const std::string& key, std::size_t index) {
  std::vector<double> v;
  for (const Json& s : runs) {
    v.push_back(s.at(key).at(index).get<double>());
  }
  return v;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Toy runs shared by the first three criteria.
struct ToyRuns {
  double y = 0.0;
  std::vector<Json> asmc;
  std::vector<Json> maps;
};

std::vector<ToyRuns> toy_runs() {
  std::vector<ToyRuns> all;
  for (const double y : {0.0, 0.5, 1.0}) {
    ToyRuns t;
    t.y = y;
    RunConfig a = load("toy_asmc.json");
    RunConfig m = load("toy_maps.json");
    a.model.y_obs = y;
    m.model.y_obs = y;
    t.asmc = replicates(a, 10);
    t.maps = replicates(m, 10);
    all.push_back(std::move(t));
  }
  return all;
}

Outcome hf_cost_reduction(const std::vector<ToyRuns>& runs) {
  Outcome o{true, ""};
  for (const ToyRuns& t : runs) {
    const double red = 1.0 - mean(column(t.maps, "hf_calls")) / mean(column(t.asmc, "hf_calls"));
    o.pass = o.pass && red >= 0.25 && red <= 0.55;
    o.detail += "y=" + fmt("%g", t.y) + ": asmc " + fmt("%.0f", mean(column(t.asmc, "hf_calls"))) + " maps " +
                fmt("%.0f", mean(column(t.maps, "hf_calls"))) + " reduction " + fmt("%.1f%%", 100.0 * red) + "; ";
  }
  o.detail += "required 25-55%";
  return o;
}

Outcome accuracy_parity(const std::vector<ToyRuns>& runs) {
  Outcome o{true, ""};
  for (const ToyRuns& t : runs) {
    const double ka = mean(column(t.asmc, "kl"));
    const double km = mean(column(t.maps, "kl"));
    o.pass = o.pass && km <= 1.3 * ka;
    o.detail += "y=" + fmt("%g", t.y) + ": kl asmc " + fmt("%.4f", ka) + " maps " + fmt("%.4f", km) + " ratio " +
                fmt("%.2f", km / ka) + "; ";
  }
  o.detail += "required ratio <= 1.3";
  return o;
}

Outcome iteration_counts(const std::vector<ToyRuns>& runs) {
  const ToyRuns& t = runs[1];
  const double ma = median(column(t.asmc, "iterations"));
  const double mm = median(column(t.maps, "iterations"));
  return {mm <= ma && mm >= 3.0 && mm <= 5.0,
          "y=0.5 median iterations asmc " + fmt("%g", ma) + " maps " + fmt("%g", mm) + "; required maps <= asmc, maps in 3..5"};
}

Outcome oracle_equivalence() {
  Outcome o{true, ""};
  RunConfig base = load("discrete_maps.json");
  RunConfig binding = base;
  binding.sampler.n_lf = 2;
  binding.sampler.alpha_lf = 0.3;
  binding.sampler.a_lf = 0.3;
  binding.sampler.eps_target = 0.0025;
  for (const RunConfig* c : {&base, &binding}) {
    const ReplicateRun run = run_replicate(*c, 0, 1);
    const auto& grid = dynamic_cast<const GridPrior&>(*run.model.prior);
    const double tv = run.summary.at("tv").get<double>();
    const auto pmf = empirical_pmf(run.result.ensemble.particles, run.result.ensemble.weights, grid);
    const double tv_plain = total_variation(
        pmf, discrete_maps_posterior(c->model.y_obs, c->sampler.eps_target, kInfinity, c->sampler.n_lf, grid.points()));
    o.pass = o.pass && tv < 0.02;
    o.detail += "n_lf=" + std::to_string(c->sampler.n_lf) + " eps_T=" + fmt("%g", c->sampler.eps_target) +
                ": tv to filtered target " + fmt("%.4f", tv) + " (to unfiltered " + fmt("%.4f", tv_plain) + "); ";
  }
  o.detail += "required < 0.02";
  return o;
}

Outcome error_bound() {
  const std::vector<double> grid = uniform_grid(-2.0, 2.0, 2001);
  std::size_t held = 0;
  std::size_t total = 0;
  double worst = 0.0;
  for (const double eps : {0.05, 0.1, 0.2, 0.5}) {
    for (const double eps_aux : {0.02, 0.05, 0.1, 0.3, 1.0}) {
      const Prop2Check c = verify_prop2_bound(0.5, eps, eps_aux, 20, grid);
      ++total;
      held += c.holds ? 1 : 0;
      if (c.bound > 0.0) {
        worst = std::max(worst, c.l1_distance / c.bound);
      }
    }
  }
  return {held == total, std::to_string(held) + "/" + std::to_string(total) +
                             " sweep points within bound, largest l1/bound " + fmt("%.3f", worst)};
}

Outcome prefilter_rate() {
  const std::vector<double> grid = uniform_grid(-2.0, 2.0, 2001);
  const Model toy = make_toy_model(0.5);
  Outcome o{true, ""};
  for (const double eps_aux : {0.01, 0.05, 0.1, 0.5, 2.0}) {
    const double quad = toy_prefilter_rate(0.5, eps_aux, 20, grid);
    const RateEstimate mc = prefilter_rate_mc(toy.pair, *toy.prior, eps_aux, 20, 100000, 17);
    const double z = std::abs(quad - mc.rate) / std::max(mc.std_error, 1e-300);
    const bool ok = std::abs(quad - mc.rate) <= 3.0 * mc.std_error;
    o.pass = o.pass && ok;
    o.detail += fmt("eps_aux=%g", eps_aux) + fmt(" quad %.4f", quad) + fmt(" mc %.4f", mc.rate) + fmt(" (%.2f se); ", z);
  }
  o.detail += "required <= 3 se";
  return o;
}

Outcome weight_identity() {
  std::size_t checked = 0;
  std::size_t mismatched = 0;
  std::size_t runs = 0;
  const UniformBoxPrior wide({-3.0}, {3.0});
  auto check = [&](const IsResult& r, double eps) {
    ++runs;
    for (std::size_t i = 0; i < r.raw_weights.size(); ++i) {
      if (!r.survived_prefilter[i]) {
        mismatched += r.raw_weights[i].value() == 0.0 ? 0 : 1;
        continue;
      }
      const double expected =
          r.density_ratios[i] * static_cast<double>(r.ensemble.particles[i].hf_passes(eps));
      ++checked;
      mismatched += r.raw_weights[i].value() == expected ? 0 : 1;
    }
  };
  for (const double y : {0.0, 0.5, 1.0}) {
    for (const double eps : {0.01, 0.1}) {
      for (const double eps_lf : {0.005, 0.05, 0.5}) {
        const Model toy = make_toy_model(y);
        IsConfig c;
        c.particles = 2000;
        c.eps = eps;
        c.eps_lf = eps_lf;
        c.seed = 31;
        check(run_prefilter_is(c, toy.pair, *toy.prior, *toy.prior), eps);
        check(run_prefilter_is(c, toy.pair, *toy.prior, wide), eps);
        check(run_abc_is(c, toy.pair, *toy.prior, wide), eps);
      }
    }
  }
  const Model ou = build_model(load("ou_maps.json").model);
  IsConfig c;
  c.particles = 500;
  c.eps = 2.0;
  c.eps_lf = 2.0;
  check(run_prefilter_is(c, ou.pair, *ou.prior, *ou.prior), c.eps);
  return {mismatched == 0 && checked > 0, std::to_string(checked) + " surviving particles over " +
                                              std::to_string(runs) + " runs, " + std::to_string(mismatched) +
                                              " mismatches"};
}

Outcome cost_and_means(const std::string& model, std::size_t reps, bool compare_means) {
  const std::vector<Json> a = replicates(load(model + "_asmc.json"), reps);
  const std::vector<Json> m = replicates(load(model + "_maps.json"), reps);
  const double red = 1.0 - mean(column(m, "hf_calls")) / mean(column(a, "hf_calls"));
  Outcome o{red >= 0.25, "hf asmc " + fmt("%.0f", mean(column(a, "hf_calls"))) + " maps " +
                             fmt("%.0f", mean(column(m, "hf_calls"))) + " reduction " + fmt("%.1f%%", 100.0 * red) +
                             " (required >= 25%)"};
  if (compare_means) {
    const auto names = a.front().at("parameter_names");
    o.detail += "; mean differences in combined between-replicate se:";
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto va = column(a, "posterior_mean", k);
      const auto vm = column(m, "posterior_mean", k);
      const double se = std::hypot(std_error(va), std_error(vm));
      const double z = std::abs(mean(va) - mean(vm)) / se;
      o.pass = o.pass && z <= 3.0;
      o.detail += " " + names[k].get<std::string>() + fmt(" %.2f", z);
    }
    o.detail += " (required <= 3)";
  }
  return o;
}

Outcome kuramoto() {
  Outcome o = cost_and_means("kuramoto", 3, false);
  const Model km = build_model(load("kuramoto_maps.json").model);
  auto time_calls = [&](const Simulator& sim) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < 5000; ++i) {
      RngStream item = RngStream::for_item(5, StreamTag::kDiagnostic, 0, i);
      RngStream draw = item.child(StreamTag::kInit, 0);
      RngStream sim_rng = item.child(StreamTag::kHfSim, 0);
      const ParameterVector theta = km.prior->sample(draw);
      static_cast<void>(sim.sample(theta, sim_rng));
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const double hf = time_calls(*km.pair.hf);
  const double lf = time_calls(*km.pair.lf);
  const double ratio = lf / hf;
  o.pass = o.pass && ratio < 0.1;
  o.detail += "; 5000 calls: hf " + fmt("%.2fs", hf) + " lf " + fmt("%.3fs", lf) + " ratio " + fmt("%.4f", ratio) +
              " (required < 0.1)";
  return o;
}

Outcome concentration() {
  const std::vector<double> modes = toy_modes(0.5);
  std::vector<double> eps_list{1.0, 0.5, 0.2, 0.1};
  std::vector<std::vector<double>> iqr(eps_list.size(), std::vector<double>(modes.size()));
  std::vector<double> mass(eps_list.size());
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    RunConfig c = load("toy_maps.json");
    c.sampler.eps_target = eps_list[e];
    std::vector<std::vector<double>> per_mode(modes.size());
    std::vector<double> masses;
    for (std::size_t r = 0; r < 10; ++r) {
      const ReplicateRun run = run_replicate(c, r, 1);
      const auto& ens = run.result.ensemble;
      const auto summary = mode_summaries(ens.particles, ens.weights, modes);
      for (std::size_t k = 0; k < modes.size(); ++k) {
        per_mode[k].push_back(summary[k].iqr);
      }
      masses.push_back(mass_near_modes(ens.particles, ens.weights, modes, 0.1));
    }
    for (std::size_t k = 0; k < modes.size(); ++k) {
      iqr[e][k] = median(per_mode[k]);
    }
    mass[e] = median(masses);
  }
  Outcome o{true, std::to_string(modes.size()) + " modes; eps_T 1/0.5/0.2/0.1: mass near modes"};
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    o.detail += fmt(" %.3f", mass[e]);
    if (e > 0) {
      o.pass = o.pass && mass[e] >= mass[e - 1];
      for (std::size_t k = 0; k < modes.size(); ++k) {
        o.pass = o.pass && iqr[e][k] <= iqr[e - 1][k];
      }
    }
  }
  o.detail += "; iqr of first mode";
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    o.detail += fmt(" %.4f", iqr[e][0]);
  }
  return o;
}

Outcome suitability_metric() {
  Outcome o{true, ""};
  RunConfig c = load("toy_maps.json");
  c.model.lf = "hf";
  c.model.common_random_numbers = true;
  const Model twin = build_model(c.model);
  SuitabilityConfig s;
  s.n_lf = 10;
  s.n_hf = 10;
  s.eps = 1e-4;
  const SuitabilityReport r = assess_suitability(s, twin.pair, *twin.prior, *twin.prior);
  o.pass = std::abs(r.e - r.lower_bound()) <= 0.05 && r.true_positives == r.hf_accepted;
  o.detail = "lf=hf: E " + fmt("%.4f", r.e) + " vs " + fmt("%.4f", r.lower_bound());

  c.model.lf = "default";
  Model constant = build_model(c.model);
  struct Far final : Simulator {
    [[nodiscard]] std::vector<double> summarize(std::span<const double> raw) const override {
      return {raw.begin(), raw.end()};
    }
    [[nodiscard]] double discrepancy(std::span<const double> x, std::span<const double> y) const override {
      return (x[0] - y[0]) * (x[0] - y[0]);
    }

   protected:
    std::vector<double> do_sample(std::span<const double>, RngStream&) const override { return {100.0}; }
  };
  constant.pair.lf = std::make_shared<Far>();
  try {
    const SuitabilityReport rc = assess_suitability(SuitabilityConfig{}, constant.pair, *constant.prior, *constant.prior);
    o.pass = o.pass && rc.e == rc.upper_bound();
    o.detail += "; constant lf: E " + fmt("%.4f", rc.e) + " vs upper bound " + fmt("%.4f", rc.upper_bound());
  } catch (const NoAcceptedSamples&) {
    o.detail += "; constant lf: NoAcceptedSamples";
  }
  return o;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "mfabc_acceptance_determinism";
  fs::remove_all(root);
  std::size_t compared = 0;
  std::size_t differing = 0;
  for (const char* name : {"toy_maps.json", "toy_asmc.json", "ou_maps.json", "discrete_maps.json"}) {
    RunConfig c = load(name);
    c.output.replicates = 2;
    if (c.sampler.particles > 1024) {
      c.sampler.particles = 1024;
    }
    const fs::path first = root / name / "t1";
    run_experiment(c, first);
    for (const unsigned threads : {1U, 2U, 8U}) {
      RunConfig again = load_run_config(first / "manifest.json");
      again.output.threads = threads;
      const fs::path out = root / name / ("rerun" + std::to_string(threads));
      run_experiment(again, out);
      for (std::size_t r = 0; r < 2; ++r) {
        const std::string rep = "replicate_" + std::to_string(r);
        for (const char* f : {"ensemble.csv", "trace.csv"}) {
          ++compared;
          differing += slurp(first / rep / f) == slurp(out / rep / f) ? 0 : 1;
        }
      }
    }
  }
  fs::remove_all(root);
  return {differing == 0, std::to_string(compared) + " csv files compared across 1/2/8 threads, " +
                              std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s [%.0fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  std::vector<ToyRuns> toy;
  report(1, "toy hf-cost reduction", [&] {
    toy = toy_runs();
    return hf_cost_reduction(toy);
  });
  report(2, "toy accuracy parity", [&] { return toy.empty() ? Outcome{false, "no toy runs"} : accuracy_parity(toy); });
  report(3, "toy iteration counts", [&] { return toy.empty() ? Outcome{false, "no toy runs"} : iteration_counts(toy); });
  report(4, "discrete oracle equivalence", oracle_equivalence);
  report(5, "pre-filter error bound", error_bound);
  report(6, "pre-filter rate", prefilter_rate);
  report(7, "weight identity", weight_identity);
  report(8, "ou cost and posterior means", [] { return cost_and_means("ou", 10, true); });
  report(9, "kuramoto cost and lf speed", kuramoto);
  report(10, "posterior concentration", concentration);
  report(11, "suitability metric", suitability_metric);
  report(12, "manifest determinism", determinism);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
