#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mfabc/asmc.hpp"
#include "mfabc/diagnostics.hpp"
#include "mfabc/errors.hpp"
#include "mfabc/maps.hpp"
#include "mfabc/models.hpp"

using namespace mfabc;

namespace {

ParticleState particle(double theta, std::vector<double> hf, std::vector<double> lf) {
  ParticleState p;
  p.theta = {theta};
  p.hf_distances = std::move(hf);
  p.set_lf_distances(std::move(lf));
  return p;
}

MapsConfig toy_config(std::uint64_t seed) {
  MapsConfig c;
  c.seed = seed;
  return c;
}

double tv_to_oracle(const SamplerResult& r, const Model& m, const MapsConfig& c) {
  const auto& grid = dynamic_cast<const GridPrior&>(*m.prior);
  const auto pmf = empirical_pmf(r.ensemble.particles, r.ensemble.weights, grid);
  const auto exact =
      discrete_maps_posterior(0.5, c.eps_target, r.trace.rows.back().eps_aux, c.n_lf, grid.points());
  return total_variation(pmf, exact);
}

}  // namespace

TEST(CriticalValue, SingletonAndMaximum) {
  std::vector<ParticleState> one{particle(0, {0.01}, {0.3})};
  for (const double a : {0.001, 0.5, 0.9}) {
    EXPECT_EQ(critical_value(one, std::vector<double>{1.0}, 1.0, 0.1, a), 0.3);
  }
  std::vector<ParticleState> ps{particle(0, {0.01}, {0.3}), particle(0, {0.01}, {0.7}), particle(0, {0.5}, {2.0})};
  EXPECT_EQ(critical_value(ps, std::vector<double>(3, 1.0 / 3.0), 1.0, 0.1, 1e-9), 0.7);
}

TEST(CriticalValue, OrderStatistic) {
  std::vector<ParticleState> ps;
  for (int i = 0; i < 1000; ++i) {
    ps.push_back(particle(0, {0.0}, {static_cast<double>((i * 7919) % 1000)}));
  }
  const std::vector<double> w(1000, 1e-3);
  // Smallest v with cumulative weight >= 0.999: the 999th order statistic (value 998).
  EXPECT_EQ(critical_value(ps, w, 1.0, 0.1, 0.001), 998.0);
}

TEST(CriticalValue, NoMassFallsBackToZero) {
  std::vector<ParticleState> ps{particle(0, {0.5}, {0.3}), particle(0, {}, {0.2})};
  EXPECT_EQ(critical_value(ps, std::vector<double>{0.5, 0.5}, 1.0, 0.1, 0.001), 0.0);
}

TEST(SelectAuxThreshold, SevenOfTenRemainActive) {
  std::vector<ParticleState> ps;
  for (int i = 1; i <= 10; ++i) {
    ps.push_back(particle(0, {}, {static_cast<double>(i)}));
  }
  const AuxThreshold a = select_aux_threshold(ps, std::vector<double>(10, 0.1), 0.7, kInfinity, 0.0);
  EXPECT_EQ(std::count_if(a.weights.begin(), a.weights.end(), [](double w) { return w > 0; }), 7);
  EXPECT_FALSE(a.clamp_bound);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(a.weights[i] > 0.0, ps[i].min_lf_distance < a.eps_aux);
  }
}

TEST(SelectAuxThreshold, AlphaOneKeepsActiveSet) {
  std::vector<ParticleState> ps{particle(0, {}, {0.2}), particle(0, {}, {0.4}), particle(0, {}, {0.9})};
  const std::vector<double> w{0.5, 0.5, 0.0};
  const AuxThreshold a = select_aux_threshold(ps, w, 1.0, 1.0, 0.0);
  EXPECT_GT(a.weights[0], 0.0);
  EXPECT_GT(a.weights[1], 0.0);
  EXPECT_EQ(a.weights[2], 0.0);
}

TEST(SelectAuxThreshold, ClampBinds) {
  std::vector<ParticleState> ps{particle(0, {}, {0.005}), particle(0, {}, {0.01}), particle(0, {}, {0.04})};
  const AuxThreshold a = select_aux_threshold(ps, std::vector<double>(3, 1.0 / 3.0), 1.0 / 3.0, 1.0, 0.05);
  EXPECT_EQ(a.raw, 0.01);
  EXPECT_EQ(a.eps_aux, 0.05);
  EXPECT_TRUE(a.clamp_bound);
  EXPECT_EQ(std::count_if(a.weights.begin(), a.weights.end(), [](double w) { return w > 0; }), 3);
}

TEST(PfMove, PrefilterRejectionCostsNoHf) {
  const Model toy = make_toy_model(0.5);
  GaussianRandomWalk kernel(1, 1.0);
  kernel.set_covariance(std::vector<double>{0.25});
  const ParticleState s = particle(0.35, std::vector<double>(10, 0.0), std::vector<double>(20, 0.0));
  std::size_t filtered = 0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const auto hf_before = toy.pair.hf->calls();
    const MoveOutcome m = pf_abc_mcmc_move(s, 0.1, 0.02, *toy.prior, kernel, toy.pair, 10, 20,
                                           RngStream::for_item(1, StreamTag::kMove, 0, i));
    EXPECT_EQ(m.lf_calls, 20U);
    if (m.prefiltered) {
      ++filtered;
      EXPECT_FALSE(m.accepted);
      EXPECT_EQ(toy.pair.hf->calls(), hf_before);
      EXPECT_EQ(m.state.theta, s.theta);
      EXPECT_EQ(m.state.lf_distances, s.lf_distances);
    }
  }
  EXPECT_GT(filtered, 100U);
}

TEST(PfMove, OutsidePriorRejectedWithoutHf) {
  Model toy = make_toy_model(0.5);
  toy.pair.observed_lf_summary = {1e9};
  GaussianRandomWalk kernel(1, 1.0);
  kernel.set_covariance(std::vector<double>{400.0});
  const ParticleState s = particle(1.9, std::vector<double>(10, 0.0), std::vector<double>(20, 0.0));
  std::size_t outside = 0;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const MoveOutcome m = pf_abc_mcmc_move(s, 0.1, kInfinity, *toy.prior, kernel, toy.pair, 10, 20,
                                           RngStream::for_item(2, StreamTag::kMove, 0, i));
    if (m.hf_calls == 0) {
      ++outside;
      EXPECT_FALSE(m.accepted);
    }
  }
  EXPECT_GT(outside, 200U);
}

TEST(PfMove, InertFilterReproducesAbcMcmcMove) {
  const Model toy = make_toy_model(0.5);
  GaussianRandomWalk kernel(1, 1.0);
  kernel.set_covariance(std::vector<double>{0.05});
  const ParticleState s = particle(0.35, {0.05, 0.3, 0.02, 1, 1, 1, 1, 1, 1, 1}, std::vector<double>(20, 0.0));
  std::size_t accepted = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const RngStream item = RngStream::for_item(3, StreamTag::kMove, 0, i);
    const MoveOutcome a = pf_abc_mcmc_move(s, 0.1, kInfinity, *toy.prior, kernel, toy.pair, 10, 20, item);
    const MoveOutcome b = mh_move(s, 0.1, *toy.prior, kernel, toy.pair, 10, item);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.state.theta, b.state.theta);
    EXPECT_EQ(a.state.hf_distances, b.state.hf_distances);
    accepted += a.accepted ? 1 : 0;
  }
  EXPECT_GT(accepted, 50U);
}

TEST(PfMove, DeferredFirstMoveSkipsHf) {
  const Model toy = make_toy_model(0.5);
  GaussianRandomWalk kernel(1, 1.0);
  kernel.set_covariance(std::vector<double>{0.05});
  ParticleState s;
  s.theta = {0.3};
  s.set_lf_distances(std::vector<double>(20, 0.0));
  for (std::uint64_t i = 0; i < 200; ++i) {
    const MoveOutcome m = pf_abc_mcmc_move(s, kInfinity, 1.0, *toy.prior, kernel, toy.pair, 10, 20,
                                           RngStream::for_item(4, StreamTag::kMove, 0, i), true);
    EXPECT_EQ(m.hf_calls, 0U);
    EXPECT_EQ(m.accepted, !m.prefiltered && m.state.theta != s.theta);
  }
  EXPECT_EQ(toy.pair.hf->calls(), 0U);
}

TEST(RunMaps, ToyTraceInvariantsAndAccounting) {
  std::vector<std::size_t> maps_iters;
  std::vector<std::size_t> asmc_iters;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Model toy = make_toy_model(0.5);
    auto kernel = toy.make_kernel();
    const MapsConfig c = toy_config(seed);
    const SamplerResult r = run_maps(c, toy.pair, *toy.prior, *kernel);
    maps_iters.push_back(r.iterations());
    EXPECT_EQ(r.hf_calls, toy.pair.hf->calls());
    EXPECT_EQ(r.lf_calls, toy.pair.lf->calls());
    EXPECT_EQ(r.lf_calls % c.n_lf, 0U);
    EXPECT_GE(r.lf_calls, c.n_lf * c.particles);
    const auto& rows = r.trace.rows;
    EXPECT_EQ(rows.back().epsilon, c.eps_target);
    for (std::size_t t = 1; t < rows.size(); ++t) {
      EXPECT_LE(rows[t].epsilon, rows[t - 1].epsilon);
      EXPECT_GE(rows[t].eps_aux, rows[t].eps_lower);
      EXPECT_GE(rows[t].hf_calls, rows[t - 1].hf_calls);
      EXPECT_EQ((rows[t].lf_calls - rows[t - 1].lf_calls) % c.n_lf, 0U);
    }
    for (std::size_t i = 0; i < r.ensemble.size(); ++i) {
      if (r.ensemble.weights[i] > 0.0) {
        EXPECT_LT(r.ensemble.particles[i].min_lf_distance, rows.back().eps_aux);
        EXPECT_GT(r.ensemble.particles[i].hf_passes(c.eps_target), 0U);
      }
    }
    const Model toy2 = make_toy_model(0.5);
    auto k2 = toy2.make_kernel();
    AsmcConfig a;
    a.seed = seed;
    const SamplerResult ra = run_asmc(a, toy2.pair, *toy2.prior, *k2);
    asmc_iters.push_back(ra.iterations());
    EXPECT_LT(r.hf_calls, ra.hf_calls);
  }
  std::sort(maps_iters.begin(), maps_iters.end());
  std::sort(asmc_iters.begin(), asmc_iters.end());
  EXPECT_LE(maps_iters[2], asmc_iters[2]);
}

TEST(RunMaps, InertFilterMatchesAsmcPosterior) {
  Model m = make_toy_model(0.5);
  m.pair.lf = std::make_shared<ToySimulator>(Fidelity::kHigh);
  m.pair.observed_lf_summary = m.pair.observed_hf_summary;
  auto kernel = m.make_kernel();
  MapsConfig c = toy_config(11);
  c.particles = 2000;
  c.alpha_lf = 1.0;
  c.a_lf = 0.999;
  const SamplerResult r = run_maps(c, m.pair, *m.prior, *kernel);

  const Model a = make_toy_model(0.5);
  auto ka = a.make_kernel();
  AsmcConfig ac;
  ac.seed = 12;
  ac.particles = 2000;
  const SamplerResult ra = run_asmc(ac, a.pair, *a.prior, *ka);
  RngStream d1(1, 0);
  RngStream d2(2, 0);
  RngStream perm(3, 0);
  const auto x = resampled_rows(r.ensemble.particles, r.ensemble.weights, 1000, d1);
  const auto y = resampled_rows(ra.ensemble.particles, ra.ensemble.weights, 1000, d2);
  EXPECT_GT(energy_test_pvalue(x, y, 200, perm), 0.05);
}

TEST(RunMaps, DiscreteOracle) {
  struct Setting {
    std::size_t n_lf;
    double alpha;
    double alpha_lf;
    double eps_target;
    double a_lf;
  };
  for (const Setting s : {Setting{20, 0.7, 0.7, 0.1, 0.001}, Setting{2, 0.7, 0.3, 0.05, 0.3}}) {
    const Model m = make_discrete_toy_model(0.5);
    auto kernel = m.make_kernel();
    MapsConfig c = toy_config(1);
    c.particles = 10000;
    c.n_lf = s.n_lf;
    c.alpha = s.alpha;
    c.alpha_lf = s.alpha_lf;
    c.eps_target = s.eps_target;
    c.a_lf = s.a_lf;
    const SamplerResult r = run_maps(c, m.pair, *m.prior, *kernel);
    EXPECT_LT(tv_to_oracle(r, m, c), 0.02) << "n_lf " << s.n_lf;
  }
}

TEST(RunMaps, ThreadCountDoesNotChangeOutput) {
  const Model a = make_toy_model(0.5);
  const Model b = make_toy_model(0.5);
  auto ka = a.make_kernel();
  auto kb = b.make_kernel();
  MapsConfig c = toy_config(5);
  c.particles = 1000;
  const SamplerResult one = run_maps(c, a.pair, *a.prior, *ka);
  c.threads = 4;
  const SamplerResult four = run_maps(c, b.pair, *b.prior, *kb);
  EXPECT_EQ(one.ensemble.weights, four.ensemble.weights);
  EXPECT_EQ(one.hf_calls, four.hf_calls);
  EXPECT_EQ(one.lf_calls, four.lf_calls);
}

TEST(RunMaps, IterationCap) {
  const Model toy = make_toy_model(0.5);
  auto kernel = toy.make_kernel();
  MapsConfig c = toy_config(6);
  c.particles = 500;
  c.iteration_cap = 1;
  EXPECT_THROW(run_maps(c, toy.pair, *toy.prior, *kernel), IterationCap);
}
