#include "mfabc/models.hpp"

#include "mfabc/errors.hpp"

namespace mfabc {

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::kToy:
      return "toy";
    case ModelId::kDiscreteToy:
      return "discrete-toy";
    case ModelId::kOu:
      return "ou";
    case ModelId::kKuramoto:
      return "kuramoto";
  }
  return "unknown";
}

ModelId model_id_from_string(const std::string& name) {
  if (name == "toy") {
    return ModelId::kToy;
  }
  if (name == "discrete-toy") {
    return ModelId::kDiscreteToy;
  }
  if (name == "ou") {
    return ModelId::kOu;
  }
  if (name == "kuramoto") {
    return ModelId::kKuramoto;
  }
  throw ConfigError("unknown model '" + name + "' (expected toy, discrete-toy, ou or kuramoto)");
}

Model make_toy_model(double y_obs, ToyDistance distance) {
  Model model;
  model.id = ModelId::kToy;
  model.prior = std::make_shared<UniformBoxPrior>(std::vector<double>{-2.0}, std::vector<double>{2.0});
  model.pair.hf = std::make_shared<ToySimulator>(Fidelity::kHigh, distance);
  model.pair.lf = std::make_shared<ToySimulator>(Fidelity::kLow, distance);
  model.pair.observed_hf_summary = {y_obs};
  model.pair.observed_lf_summary = {y_obs};
  model.parameter_names = {"theta"};
  model.observed = {{"y", {y_obs}}};
  model.make_kernel = [] { return std::make_unique<GaussianRandomWalk>(1); };
  return model;
}

std::vector<double> discrete_toy_grid() {
  std::vector<double> grid;
  for (int j = 0; j <= 10; ++j) {
    grid.push_back(j / 10.0);
  }
  return grid;
}

Model make_discrete_toy_model(double y_obs, ToyDistance distance) {
  Model model = make_toy_model(y_obs, distance);
  model.id = ModelId::kDiscreteToy;
  model.prior = std::make_shared<GridPrior>(discrete_toy_grid());
  model.make_kernel = [] { return std::make_unique<GridRandomWalk>(0.1, 2); };
  return model;
}

Model make_ou_model(const OuModelOptions& options, const std::optional<std::vector<double>>& observed) {
  std::vector<double> trajectory;
  if (observed) {
    trajectory = *observed;
  } else {
    RngStream rng = RngStream::for_item(options.observed_seed, StreamTag::kObserved, 0, 0);
    trajectory = ou_hf_sample(options.true_theta, rng, options.simulation);
  }
  Model model;
  model.id = ModelId::kOu;
  model.prior = std::make_shared<UniformBoxPrior>(std::vector<double>{0.1, 0.1, 0.1, 2.0},
                                                  std::vector<double>{3.0, 1.0, 2.0, 6.0});
  model.pair.hf = std::make_shared<OuHfSimulator>(options.simulation);
  model.pair.lf = std::make_shared<OuLfSimulator>(options.simulation);
  model.pair.observed_hf_summary = ou_hf_summary(trajectory, options.simulation.s1_divisor);
  model.pair.observed_lf_summary = {model.pair.observed_hf_summary[0], model.pair.observed_hf_summary[1]};
  model.true_theta = options.true_theta;
  model.parameter_names = {"mu", "sigma", "gamma", "mu_offset"};
  std::vector<double> times(trajectory.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    times[k] = static_cast<double>(k) * options.simulation.record_interval;
  }
  model.observed = {{"t", std::move(times)}, {"x", std::move(trajectory)}};
  model.make_kernel = [] { return std::make_unique<GaussianRandomWalk>(4); };
  return model;
}

Model make_kuramoto_model(const KuramotoModelOptions& options, const std::optional<std::vector<double>>& observed) {
  std::vector<double> raw;
  if (observed) {
    raw = *observed;
  } else {
    RngStream rng = RngStream::for_item(options.observed_seed, StreamTag::kObserved, 0, 0);
    raw = kuramoto_hf_sample(options.true_theta, rng, options.simulation);
  }
  const std::size_t n = options.simulation.steps() + 1;
  if (raw.size() != 2 * n) {
    throw LengthMismatch("make_kuramoto_model: observed data must hold R and Phi on the time grid");
  }
  const std::vector<double> r_obs(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n));
  const std::size_t half = kuramoto_half_time_index(r_obs, options.simulation);

  Model model;
  model.id = ModelId::kKuramoto;
  model.prior = std::make_shared<UniformBoxPrior>(options.prior_lower, options.prior_upper);
  model.pair.hf = std::make_shared<KuramotoSimulator>(Fidelity::kHigh, half, options.simulation);
  model.pair.lf = std::make_shared<KuramotoSimulator>(Fidelity::kLow, half, options.simulation);
  model.pair.observed_hf_summary = kuramoto_summary(raw, half, options.simulation);
  model.pair.observed_lf_summary = model.pair.observed_hf_summary;
  model.true_theta = options.true_theta;
  model.parameter_names = {"K", "omega0", "gamma"};
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) {
    times[k] = static_cast<double>(k) * options.simulation.dt;
  }
  model.observed = {{"t", std::move(times)},
                    {"R", std::vector<double>(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n))},
                    {"Phi", std::vector<double>(raw.begin() + static_cast<std::ptrdiff_t>(n), raw.end())}};
  model.make_kernel = [] { return std::make_unique<GaussianRandomWalk>(3); };
  return model;
}

}  // namespace mfabc
