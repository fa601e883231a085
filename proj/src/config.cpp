#include "mfabc/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "mfabc/errors.hpp"
#include "mfabc/io.hpp"

namespace mfabc {

namespace {

/// Typed access to one JSON object that remembers which keys were read so
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json& json, std::string name) : json_(json), name_(std::move(name)) {
    if (!json_.is_object()) {
      throw ConfigError(name_ + ": expected an object");
    }
  }

  [[nodiscard]] bool has(const std::string& key) const { return json_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out, bool required = false) {
    seen_.insert(key);
    if (!json_.contains(key)) {
      if (required) {
        throw ConfigError(name_ + "." + key + ": required field is missing");
      }
      return;
    }
    try {
      out = json_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(name_ + "." + key + ": wrong type (" + json_.at(key).dump() + ")");
    }
  }

  void finish() const {
    for (const auto& item : json_.items()) {
      if (!seen_.contains(item.key())) {
        throw ConfigError(name_ + "." + item.key() + ": unknown key");
      }
    }
  }

 private:
  const Json& json_;
  std::string name_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) {
    throw ConfigError(field + ": " + what);
  }
}

ModelSpec parse_model(const Json& json) {
  Section s(json, "model");
  ModelSpec m;
  s.get("name", m.name, true);
  const ModelId id = model_id_from_string(m.name);
  const bool toy = id == ModelId::kToy || id == ModelId::kDiscreteToy;
  s.get("y_obs", m.y_obs, toy);
  s.get("toy_distance", m.toy_distance);
  s.get("true_theta", m.true_theta);
  s.get("observed_seed", m.observed_seed);
  s.get("observed_file", m.observed_file);
  s.get("s1_divisor", m.s1_divisor);
  s.get("prior_lower", m.prior_lower);
  s.get("prior_upper", m.prior_upper);
  s.get("oscillators", m.oscillators);
  s.get("lf", m.lf);
  s.get("common_random_numbers", m.common_random_numbers);
  s.finish();
  require(m.toy_distance == "absolute" || m.toy_distance == "squared", "model.toy_distance",
          "expected \"absolute\" or \"squared\"");
  require(m.lf == "default" || m.lf == "hf", "model.lf", "expected \"default\" or \"hf\"");
  require(m.s1_divisor > 0.0, "model.s1_divisor", "must be > 0");
  require(m.oscillators >= 1, "model.oscillators", "must be >= 1");
  require(m.prior_lower.size() == m.prior_upper.size(), "model.prior_lower",
          "prior_lower and prior_upper differ in length");
  if (m.true_theta.empty()) {
    if (id == ModelId::kOu) {
      m.true_theta = OuModelOptions{}.true_theta;
    } else if (id == ModelId::kKuramoto) {
      m.true_theta = KuramotoModelOptions{}.true_theta;
    }
  }
  if (id == ModelId::kKuramoto && m.prior_lower.empty()) {
    m.prior_lower = KuramotoModelOptions{}.prior_lower;
    m.prior_upper = KuramotoModelOptions{}.prior_upper;
  }
  return m;
}

SamplerSpec parse_sampler(const Json& json) {
  Section s(json, "sampler");
  SamplerSpec p;
  s.get("name", p.name, true);
  require(p.name == "asmc" || p.name == "maps" || p.name == "is" || p.name == "abc-is" || p.name == "mcmc-reference",
          "sampler.name", "expected asmc, maps, is, abc-is or mcmc-reference (got \"" + p.name + "\")");
  s.get("particles", p.particles);
  s.get("n_hf", p.n_hf);
  s.get("n_lf", p.n_lf);
  s.get("alpha", p.alpha);
  p.alpha_lf = p.alpha;
  s.get("alpha_lf", p.alpha_lf);
  s.get("a_lf", p.a_lf);
  s.get("eps_target", p.eps_target, true);
  s.get("eps_lf", p.eps_lf, p.name == "is");
  s.get("ess_fraction", p.ess_fraction);
  s.get("moves", p.moves);
  s.get("iteration_cap", p.iteration_cap);
  s.get("defer_initial_hf", p.defer_initial_hf);
  s.get("resampling", p.resampling);
  s.get("chains", p.chains);
  s.get("iterations", p.iterations);
  s.get("burn_in", p.burn_in);
  s.get("thin", p.thin);
  s.get("start_particles", p.start_particles);
  s.finish();
  require(p.particles >= 1, "sampler.particles", "must be >= 1");
  require(p.n_hf >= 1, "sampler.n_hf", "must be >= 1");
  require(p.n_lf >= 1, "sampler.n_lf", "must be >= 1");
  require(p.alpha > 0.0 && p.alpha <= 1.0, "sampler.alpha", "must lie in (0, 1]");
  require(p.alpha_lf > 0.0 && p.alpha_lf <= 1.0, "sampler.alpha_lf", "must lie in (0, 1]");
  require(p.a_lf > 0.0 && p.a_lf < 1.0, "sampler.a_lf", "must lie in (0, 1)");
  require(p.eps_target > 0.0, "sampler.eps_target", "must be > 0");
  require(p.eps_lf > 0.0, "sampler.eps_lf", "must be > 0");
  require(p.ess_fraction >= 0.0 && p.ess_fraction <= 1.0, "sampler.ess_fraction", "must lie in [0, 1]");
  require(p.moves >= 1, "sampler.moves", "must be >= 1");
  require(p.iteration_cap >= 1, "sampler.iteration_cap", "must be >= 1");
  require(p.resampling == "systematic" || p.resampling == "multinomial", "sampler.resampling",
          "expected systematic or multinomial");
  require(p.chains >= 1 && p.iterations >= 1 && p.thin >= 1, "sampler.chains", "chains, iterations and thin must be >= 1");
  require(p.burn_in >= 0.0 && p.burn_in < 1.0, "sampler.burn_in", "must lie in [0, 1)");
  require(p.start_particles >= p.chains, "sampler.start_particles", "must be >= chains");
  return p;
}

SuitabilitySpec parse_suitability(const Json& json) {
  Section s(json, "suitability");
  SuitabilitySpec p;
  s.get("samples", p.samples);
  s.get("kappa", p.kappa);
  s.get("n_lf", p.n_lf);
  s.get("n_hf", p.n_hf);
  s.get("eps", p.eps, true);
  s.finish();
  require(p.samples >= 1, "suitability.samples", "must be >= 1");
  require(p.kappa > 0.0 && p.kappa < 1.0, "suitability.kappa", "must lie in (0, 1)");
  require(p.n_lf >= 1 && p.n_hf >= 1, "suitability.n_lf", "n_lf and n_hf must be >= 1");
  require(p.eps > 0.0, "suitability.eps", "must be > 0");
  return p;
}

ReferenceSpec parse_reference(const Json& json) {
  Section s(json, "reference");
  ReferenceSpec r;
  s.get("kind", r.kind, true);
  s.get("path", r.path, r.kind == "samples");
  s.finish();
  require(r.kind == "none" || r.kind == "analytic" || r.kind == "samples", "reference.kind",
          "expected none, analytic or samples");
  return r;
}

OutputSpec parse_output(const Json& json) {
  Section s(json, "output");
  OutputSpec o;
  s.get("directory", o.directory);
  s.get("replicates", o.replicates);
  s.get("seed", o.seed);
  s.get("threads", o.threads);
  s.finish();
  require(o.replicates >= 1, "output.replicates", "must be >= 1");
  require(o.threads >= 1, "output.threads", "must be >= 1");
  return o;
}

}  // namespace

RunConfig parse_run_config(const Json& json) {
  Section top(json, "config");
  RunConfig c;
  Json section;
  top.get("model", section, true);
  c.model = parse_model(section);
  if (top.has("sampler")) {
    top.get("sampler", section);
    c.sampler = parse_sampler(section);
    c.has_sampler = true;
  }
  if (top.has("suitability")) {
    top.get("suitability", section);
    c.suitability = parse_suitability(section);
    c.has_suitability = true;
  }
  if (top.has("reference")) {
    top.get("reference", section);
    c.reference = parse_reference(section);
  }
  if (top.has("output")) {
    top.get("output", section);
    c.output = parse_output(section);
  }
  top.finish();
  const ModelId id = model_id_from_string(c.model.name);
  if (c.reference.kind == "analytic" && id != ModelId::kToy && id != ModelId::kDiscreteToy) {
    throw ConfigError("reference.kind: analytic reference exists only for the toy models");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  Json json;
  try {
    json = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (json.is_object() && json.contains("config_hash") && json.contains("config")) {
    return parse_run_config(json.at("config"));
  }
  return parse_run_config(json);
}

Json to_json(const RunConfig& c) {
  Json j;
  const ModelSpec& m = c.model;
  j["model"] = {{"name", m.name},
                {"y_obs", m.y_obs},
                {"toy_distance", m.toy_distance},
                {"true_theta", m.true_theta},
                {"observed_seed", m.observed_seed},
                {"observed_file", m.observed_file},
                {"s1_divisor", m.s1_divisor},
                {"prior_lower", m.prior_lower},
                {"prior_upper", m.prior_upper},
                {"oscillators", m.oscillators},
                {"lf", m.lf},
                {"common_random_numbers", m.common_random_numbers}};
  if (c.has_sampler) {
    const SamplerSpec& p = c.sampler;
    j["sampler"] = {{"name", p.name},
                    {"particles", p.particles},
                    {"n_hf", p.n_hf},
                    {"n_lf", p.n_lf},
                    {"alpha", p.alpha},
                    {"alpha_lf", p.alpha_lf},
                    {"a_lf", p.a_lf},
                    {"eps_target", p.eps_target},
                    {"eps_lf", p.eps_lf},
                    {"ess_fraction", p.ess_fraction},
                    {"moves", p.moves},
                    {"iteration_cap", p.iteration_cap},
                    {"defer_initial_hf", p.defer_initial_hf},
                    {"resampling", p.resampling},
                    {"chains", p.chains},
                    {"iterations", p.iterations},
                    {"burn_in", p.burn_in},
                    {"thin", p.thin},
                    {"start_particles", p.start_particles}};
  }
  if (c.has_suitability) {
    const SuitabilitySpec& s = c.suitability;
    j["suitability"] = {
        {"samples", s.samples}, {"kappa", s.kappa}, {"n_lf", s.n_lf}, {"n_hf", s.n_hf}, {"eps", s.eps}};
  }
  j["reference"] = {{"kind", c.reference.kind}, {"path", c.reference.path}};
  j["output"] = {{"directory", c.output.directory},
                 {"replicates", c.output.replicates},
                 {"seed", c.output.seed},
                 {"threads", c.output.threads}};
  return j;
}

std::string config_hash(const Json& json) {
  Json keyed = json;
  if (keyed.contains("output") && keyed["output"].is_object()) {
    keyed["output"].erase("directory");
    keyed["output"].erase("threads");
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : keyed.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ToyDistance toy_distance(const ModelSpec& spec) {
  return spec.toy_distance == "squared" ? ToyDistance::kSquared : ToyDistance::kAbsolute;
}

Model build_model(const ModelSpec& spec) {
  const ModelId id = model_id_from_string(spec.name);
  Model model;
  switch (id) {
    case ModelId::kToy:
      model = make_toy_model(spec.y_obs, toy_distance(spec));
      break;
    case ModelId::kDiscreteToy:
      model = make_discrete_toy_model(spec.y_obs, toy_distance(spec));
      break;
    case ModelId::kOu: {
      OuModelOptions options;
      options.true_theta = spec.true_theta;
      options.observed_seed = spec.observed_seed;
      options.simulation.s1_divisor = spec.s1_divisor;
      std::optional<std::vector<double>> observed;
      if (!spec.observed_file.empty()) {
        observed = read_csv(spec.observed_file).column("x");
      }
      model = make_ou_model(options, observed);
      break;
    }
    case ModelId::kKuramoto: {
      KuramotoModelOptions options;
      options.true_theta = spec.true_theta;
      options.observed_seed = spec.observed_seed;
      options.simulation.oscillators = spec.oscillators;
      options.prior_lower = spec.prior_lower;
      options.prior_upper = spec.prior_upper;
      std::optional<std::vector<double>> observed;
      if (!spec.observed_file.empty()) {
        const CsvTable table = read_csv(spec.observed_file);
        std::vector<double> raw = table.column("R");
        const std::vector<double> phi = table.column("Phi");
        raw.insert(raw.end(), phi.begin(), phi.end());
        observed = std::move(raw);
      }
      model = make_kuramoto_model(options, observed);
      break;
    }
  }
  if (spec.lf == "hf") {
    // a separate instance keeps the LF call counter apart from the HF one
    ModelSpec twin = spec;
    twin.lf = "default";
    const Model copy = build_model(twin);
    model.pair.lf = copy.pair.hf;
    model.pair.observed_lf_summary = model.pair.observed_hf_summary;
  }
  model.pair.common_random_numbers = spec.common_random_numbers;
  if (!spec.prior_lower.empty() && id != ModelId::kKuramoto && id != ModelId::kDiscreteToy) {
    if (spec.prior_lower.size() != model.true_theta.size() && !model.true_theta.empty()) {
      throw ConfigError("model.prior_lower: dimension does not match the model");
    }
    model.prior = std::make_shared<UniformBoxPrior>(spec.prior_lower, spec.prior_upper);
  }
  return model;
}

}  // namespace mfabc
