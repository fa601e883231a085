// Command line front end: mfabc <subcommand> [options]
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfabc/config.hpp"
#include "mfabc/errors.hpp"
#include "mfabc/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "Config file or run manifest (JSON)");
  if (needs_config) {
    opt->required();
  }
  cmd->add_option("--out", c.out, "Output directory (default: output.directory of the config)");
  cmd->add_option("--replicates", c.replicates, "Number of replicates");
  cmd->add_option("--seed", c.seed, "Base seed; replicate r uses seed + r");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

mfabc::RunConfig load(const Common& c, const std::string& path) {
  mfabc::RunConfig cfg = mfabc::load_run_config(path);
  if (c.replicates) {
    cfg.output.replicates = *c.replicates;
  }
  if (c.seed) {
    cfg.output.seed = *c.seed;
  }
  if (c.threads) {
    cfg.output.threads = *c.threads;
  }
  if (!c.out.empty()) {
    cfg.output.directory = c.out;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multifidelity ABC samplers and diagnostics"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "Run the configured sampler for every replicate");
  add_common(run, run_opts, true);

  Common sampler_opts;
  std::vector<CLI::App*> shortcuts;
  for (const char* name : {"asmc", "maps", "is"}) {
    auto* cmd = app.add_subcommand(name, std::string("Run the config with the sampler set to ") + name);
    add_common(cmd, sampler_opts, true);
    shortcuts.push_back(cmd);
  }

  Common cmp_opts;
  std::string config_b;
  std::vector<std::string> metrics{"kl", "ess", "hf_calls", "wall_time"};
  auto* compare = app.add_subcommand("compare", "Run two configs and tabulate per-metric changes of B against A");
  add_common(compare, cmp_opts, true);
  compare->add_option("--config-b", config_b, "Second config")->required();
  compare->add_option("--metrics", metrics, "Metrics: kl, ess, hf_calls, lf_calls, wall_time, iterations")
      ->delimiter(',');

  Common suit_opts;
  auto* suitability = app.add_subcommand("suitability", "Score how well the LF model tracks the HF model");
  add_common(suitability, suit_opts, true);

  Common verify_opts;
  double y_obs = 0.5;
  auto* verify = app.add_subcommand("verify", "Check the pre-filter error bound and acceptance rate on the toy model");
  add_common(verify, verify_opts, false);
  verify->add_option("--y-obs", y_obs, "Toy observation");

  Common gen_opts;
  auto* gen = app.add_subcommand("gen-observed", "Write the model's observed data set to observed.csv");
  add_common(gen, gen_opts, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const mfabc::RunConfig cfg = load(run_opts, run_opts.config);
      const auto summaries = mfabc::run_experiment(cfg, cfg.output.directory);
      for (const auto& s : summaries) {
        std::cout << s.dump() << '\n';
      }
    }
    for (auto* cmd : shortcuts) {
      if (cmd->parsed()) {
        mfabc::RunConfig cfg = load(sampler_opts, sampler_opts.config);
        cfg.sampler.name = cmd->get_name();
        cfg.has_sampler = true;
        const auto summaries = mfabc::run_experiment(cfg, cfg.output.directory);
        for (const auto& s : summaries) {
          std::cout << s.dump() << '\n';
        }
      }
    }
    if (compare->parsed()) {
      const mfabc::RunConfig a = load(cmp_opts, cmp_opts.config);
      mfabc::RunConfig b = load(cmp_opts, config_b);
      std::cout << mfabc::compare_experiments(a, b, metrics, a.output.directory).dump(2) << '\n';
    }
    if (suitability->parsed()) {
      const mfabc::RunConfig cfg = load(suit_opts, suit_opts.config);
      std::cout << mfabc::run_suitability(cfg, cfg.output.directory).dump(2) << '\n';
    }
    if (verify->parsed()) {
      mfabc::RunConfig cfg;
      mfabc::ToyDistance distance = mfabc::ToyDistance::kSquared;
      if (!verify_opts.config.empty()) {
        cfg = load(verify_opts, verify_opts.config);
        y_obs = cfg.model.y_obs;
        distance = mfabc::toy_distance(cfg.model);
      } else {
        cfg.output.directory = verify_opts.out.empty() ? "out" : verify_opts.out;
        cfg.output.seed = verify_opts.seed.value_or(1);
        cfg.output.threads = verify_opts.threads.value_or(1);
      }
      const auto report = mfabc::run_verify(y_obs, distance, cfg.output.seed, cfg.output.threads, cfg.output.directory);
      std::cout << report.dump(2) << '\n';
      if (!report.at("error_bound_holds").get<bool>() || !report.at("prefilter_rate_agrees").get<bool>()) {
        return 3;
      }
    }
    if (gen->parsed()) {
      const mfabc::RunConfig cfg = load(gen_opts, gen_opts.config);
      mfabc::generate_observed(cfg, cfg.output.directory);
    }
  } catch (const mfabc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mfabc::MetricUnavailable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
