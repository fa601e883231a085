#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mfabc/config.hpp"
#include "mfabc/errors.hpp"
#include "mfabc/experiment.hpp"

using namespace mfabc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mfabc_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json small_toy(const std::string& sampler) {
  return Json::parse(R"({
    "model": {"name": "toy", "y_obs": 0.5},
    "sampler": {"name": ")" + sampler + R"(", "particles": 256, "eps_target": 0.3},
    "reference": {"kind": "analytic"},
    "output": {"replicates": 2, "seed": 3}
  })");
}

fs::path write(const fs::path& path, const Json& j) {
  std::ofstream(path) << j.dump(2);
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& path) { return Json::parse(slurp(path)); }

int cli(const std::string& args) {
  const std::string cmd = std::string(MFABC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error(const Json& j) {
  try {
    parse_run_config(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MissingTargetNamesField) {
  Json j = small_toy("maps");
  j["sampler"].erase("eps_target");
  EXPECT_NE(config_error(j).find("sampler.eps_target"), std::string::npos);
}

TEST(Config, UnknownKeyAndBadValues) {
  Json j = small_toy("maps");
  j["sampler"]["partcles"] = 10;
  EXPECT_NE(config_error(j).find("sampler.partcles"), std::string::npos);

  j = small_toy("maps");
  j["sampler"]["alpha"] = 1.5;
  EXPECT_NE(config_error(j).find("sampler.alpha"), std::string::npos);

  j = small_toy("maps");
  j["sampler"]["particles"] = "many";
  EXPECT_NE(config_error(j).find("sampler.particles"), std::string::npos);

  j = small_toy("maps");
  j["model"]["toy_distance"] = "manhattan";
  EXPECT_NE(config_error(j).find("model.toy_distance"), std::string::npos);

  j = small_toy("bogus");
  EXPECT_NE(config_error(j).find("sampler.name"), std::string::npos);
}

TEST(Config, RoundTripThroughJson) {
  const RunConfig a = parse_run_config(small_toy("maps"));
  const RunConfig b = parse_run_config(to_json(a));
  EXPECT_EQ(config_hash(to_json(a)), config_hash(to_json(b)));
  EXPECT_EQ(b.sampler.particles, 256u);
  EXPECT_EQ(b.sampler.alpha_lf, b.sampler.alpha);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  Json bad = small_toy("maps");
  bad["sampler"].erase("eps_target");
  EXPECT_EQ(cli("run --config " + write(dir / "bad.json", bad).string()), 2);
  EXPECT_EQ(cli("run --config " + (dir / "missing.json").string()), 2);
  EXPECT_NE(cli("frobnicate"), 0);

  Json stuck = small_toy("maps");
  stuck["sampler"]["iteration_cap"] = 1;
  stuck["sampler"]["eps_target"] = 0.001;
  EXPECT_EQ(cli("run --config " + write(dir / "stuck.json", stuck).string() + " --out " + (dir / "o").string()), 3);

  EXPECT_EQ(cli("run --config " + write(dir / "ok.json", small_toy("maps")).string() + " --out " +
                (dir / "ok").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "ok" / "replicate_1" / "trace.csv"));
  EXPECT_FALSE(fs::exists(dir / "o"));
}

TEST(Cli, ShortcutOverridesSampler) {
  const fs::path dir = scratch("shortcut");
  const fs::path cfg = write(dir / "c.json", small_toy("maps"));
  ASSERT_EQ(cli("asmc --config " + cfg.string() + " --out " + (dir / "a").string() + " --replicates 1"), 0);
  const Json s = read_json(dir / "a" / "replicate_0" / "summary.json");
  EXPECT_EQ(s.at("method").get<std::string>(), "asmc");
  EXPECT_EQ(s.at("lf_calls").get<std::uint64_t>(), 0u);
}

TEST(Cli, ManifestRerunIsByteIdentical) {
  const fs::path dir = scratch("manifest");
  const fs::path cfg = write(dir / "c.json", small_toy("maps"));
  ASSERT_EQ(cli("run --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
  for (const char* threads : {"1", "2", "8"}) {
    const fs::path out = dir / (std::string("b") + threads);
    ASSERT_EQ(cli("run --config " + (dir / "a" / "manifest.json").string() + " --out " + out.string() +
                  " --threads " + threads),
              0);
    for (const char* r : {"replicate_0", "replicate_1"}) {
      for (const char* f : {"ensemble.csv", "trace.csv"}) {
        EXPECT_EQ(slurp(dir / "a" / r / f), slurp(out / r / f)) << threads << ' ' << r << ' ' << f;
      }
    }
    EXPECT_EQ(read_json(dir / "a" / "manifest.json").at("config_hash"),
              read_json(out / "manifest.json").at("config_hash"));
  }
}

TEST(Cli, CompareIdenticalConfigsShowsNoChange) {
  const fs::path dir = scratch("compare");
  const fs::path cfg = write(dir / "c.json", small_toy("maps"));
  ASSERT_EQ(cli("compare --config " + cfg.string() + " --config-b " + cfg.string() + " --metrics kl,hf_calls,ess --out " +
                (dir / "cmp").string()),
            0);
  const std::string changes = slurp(dir / "cmp" / "changes.csv");
  EXPECT_NE(changes.find("hf_calls"), std::string::npos);
  RunConfig c = parse_run_config(small_toy("maps"));
  const Json report = compare_experiments(c, c, {"hf_calls", "kl"}, dir / "cmp2");
  for (const auto& row : report) {
    EXPECT_EQ(row.at("percent_change").get<double>(), 0.0);
  }
  EXPECT_TRUE(fs::exists(dir / "cmp" / "comparison.csv"));
}

TEST(Cli, CompareKlWithoutReference) {
  const fs::path dir = scratch("compare_kl");
  Json j = small_toy("maps");
  j["reference"]["kind"] = "none";
  const fs::path cfg = write(dir / "c.json", j);
  EXPECT_EQ(cli("compare --config " + cfg.string() + " --config-b " + cfg.string() + " --metrics kl --out " +
                (dir / "cmp").string()),
            2);
  const RunConfig c = parse_run_config(j);
  EXPECT_THROW(compare_experiments(c, c, {"kl"}, dir / "cmp2"), MetricUnavailable);
  EXPECT_EQ(cli("compare --config " + cfg.string() + " --config-b " + cfg.string() + " --metrics hf_calls --out " +
                (dir / "cmp3").string()),
            0);
}

TEST(Cli, SuitabilityAndVerify) {
  const fs::path dir = scratch("suit");
  Json j = small_toy("maps");
  j.erase("sampler");
  j["suitability"] = {{"samples", 1000}, {"eps", 0.1}};
  ASSERT_EQ(cli("suitability --config " + write(dir / "s.json", j).string() + " --out " + (dir / "s").string()), 0);
  const Json s = read_json(dir / "s" / "suitability.json");
  for (const char* key : {"epsilon0", "epsilon_tilde0", "E", "kappa", "N0", "hf_calls", "lf_calls"}) {
    EXPECT_TRUE(s.contains(key)) << key;
  }
  EXPECT_GE(s.at("E").get<double>(), s.at("E_lower_bound").get<double>());

  ASSERT_EQ(cli("verify --out " + (dir / "v").string()), 0);
  const Json v = read_json(dir / "v" / "verify.json");
  EXPECT_TRUE(v.at("error_bound_holds").get<bool>());
  EXPECT_EQ(v.at("error_bound").size(), 20u);
}

TEST(Cli, GenObserved) {
  const fs::path dir = scratch("gen");
  const Json j = Json::parse(R"({"model": {"name": "ou"}, "output": {"seed": 1}})");
  ASSERT_EQ(cli("gen-observed --config " + write(dir / "ou.json", j).string() + " --out " + (dir / "g").string()), 0);
  const std::string csv = slurp(dir / "g" / "observed.csv");
  EXPECT_EQ(csv.rfind("t,x", 0), 0u);
}
