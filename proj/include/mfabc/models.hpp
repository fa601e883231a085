#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfabc/distributions.hpp"
#include "mfabc/simulators.hpp"

namespace mfabc {

enum class ModelId { kToy, kDiscreteToy, kOu, kKuramoto };

std::string to_string(ModelId id);
ModelId model_id_from_string(const std::string& name);

/// A named observed series (a CSV column).
struct ObservedSeries {
  std::string name;
  std::vector<double> values;
};

/// Everything a sampler needs to run one benchmark problem.
struct Model {
  ModelId id = ModelId::kToy;
  std::shared_ptr<const Prior> prior;
  FidelityPair pair;
  ParameterVector true_theta;
  std::vector<std::string> parameter_names;
  std::vector<ObservedSeries> observed;
  std::function<std::unique_ptr<ProposalKernel>()> make_kernel;
};

/// Toy model with U[-2, 2] prior and a scalar observation.
Model make_toy_model(double y_obs, ToyDistance distance = ToyDistance::kSquared);

/// Toy simulators on the 11-point grid {0, 0.1, ..., 1} with a uniform prior
/// and a +-1/+-2 step grid random walk.
Model make_discrete_toy_model(double y_obs, ToyDistance distance = ToyDistance::kSquared);
std::vector<double> discrete_toy_grid();

struct OuModelOptions {
  ParameterVector true_theta{2.0, 0.5, 1.0, 3.0};
  std::uint64_t observed_seed = 1;
  OuOptions simulation{};
};

/// OU model; the observation is one HF realization at true_theta unless an
/// observed trajectory (301 points) is supplied.
Model make_ou_model(const OuModelOptions& options, const std::optional<std::vector<double>>& observed = std::nullopt);

struct KuramotoModelOptions {
  ParameterVector true_theta{2.0, 1.0471975511965976, 0.1};
  std::uint64_t observed_seed = 1;
  KuramotoOptions simulation{};
  std::vector<double> prior_lower{0.1, 0.0, 0.01};
  std::vector<double> prior_upper{5.0, 6.283185307179586, 1.0};
};

/// Kuramoto model; observed (R, Phi) is one HF realization at true_theta
/// unless supplied as R followed by Phi on the time grid.
Model make_kuramoto_model(const KuramotoModelOptions& options,
                          const std::optional<std::vector<double>>& observed = std::nullopt);

}  // namespace mfabc
