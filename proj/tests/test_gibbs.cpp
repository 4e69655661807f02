#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "ppg/error.hpp"
#include "ppg/gibbs.hpp"
#include "ppg/models.hpp"
#include "ppg/oracles.hpp"
#include "support/enumeration.hpp"
#include "support/stats.hpp"

using namespace ppg;

namespace {

DiscreteHmm small_hmm() {
  return DiscreteHmm::with_defaults({{0.7, 0.3}, {0.4, 0.6}}, {{0.8, 0.2}, {0.3, 0.7}});
}

std::vector<double> flat(const Trajectory& t) { return {t.states().flat().begin(), t.states().flat().end()}; }

}  // namespace

TEST(PathStore, ExtendsAlongAncestors) {
  const auto model = as_feynman_kac(small_hmm(), {0, 1, 0});
  const ParticleCloud c0(model, 0, StateArray(1, {0, 1, 1}));
  const ParticleCloud c1(model, 1, StateArray(1, {1, 0, 0}));
  const PathStore p0(c0);
  const std::vector<std::size_t> anc{2, 0, 0};
  const PathStore p1 = p0.extended(anc, c1);
  EXPECT_EQ(p1.length(), 2u);
  EXPECT_EQ(flat(p1.trajectory(0)), (std::vector<double>{1, 1}));
  EXPECT_EQ(flat(p1.trajectory(1)), (std::vector<double>{0, 0}));
  EXPECT_EQ(p1.end_point(0)[0], 1.0);
  const std::vector<std::size_t> bad{3, 0, 0};
  EXPECT_THROW(p0.extended(bad, c1), InputError);
}

TEST(CondParis, FrozenPathIsAlwaysStored) {
  const DiscreteHmm hmm = small_hmm();
  const std::vector<double> obs{0, 1, 1, 0};
  const auto model = as_feynman_kac(hmm, obs);
  const auto f = one_lag_functional(hmm, 3);
  Rng rng(12);
  const Trajectory zeta = Trajectory::scalar({1, 0, 1, 1});
  for (int rep = 0; rep < 200; ++rep) {
    CondParisState s = cond_paris_init(model, 3, zeta[0], rng);
    for (std::size_t m = 0; m < 3; ++m) {
      s = cond_paris_step(model, f, s, zeta[m + 1], {}, rng);
      EXPECT_EQ(s.cloud.position(s.frozen_slot)[0], zeta[m + 1][0]);
    }
  }
}

TEST(CondParis, PathLawEqualsFfbsiLawOnFrozenClouds) {
  const DiscreteHmm hmm = small_hmm();
  const std::vector<double> obs{0, 1, 1};
  const auto model = as_feynman_kac(hmm, obs);
  const auto f = one_lag_functional(hmm, 2);
  for (const auto& positions : std::vector<std::vector<std::vector<double>>>{
           {{0, 1}, {1, 0}, {1, 1}}, {{0, 0}, {0, 1}, {1, 0}}, {{1, 1}, {0, 1}, {0, 1}}}) {
    const auto clouds = support::frozen_clouds(model, positions);
    const auto ffbsi = support::ffbsi_path_law(model, clouds);
    for (std::size_t big_m : {1u, 2u}) {
      const auto paris = support::cond_paris_path_law(model, f, clouds, big_m);
      EXPECT_LT(support::max_abs_difference(ffbsi, paris), 1e-10);
    }
  }
}

TEST(CondParis, ApplyDrawsAveragesStatistics) {
  const DiscreteHmm hmm = DiscreteHmm::with_defaults({{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}});
  DiscreteHmm valued = hmm;
  valued.values = {2.0, 3.0};
  const auto model = as_feynman_kac(valued, {0, 0});
  const auto f = one_lag_functional(valued, 1);
  const ParticleCloud c0(model, 0, StateArray(1, {0, 1}));
  const ParticleCloud c1(model, 1, StateArray(1, {1, 0}));
  const CondParisState s0{c0, PathStore(c0), {10.0, 20.0}, 0};
  const std::vector<std::size_t> draws{0, 1, 1, 1};
  const CondParisState s1 = cond_paris_apply_draws(f, s0, ConditionalCloud{c1, 1}, draws, 2);
  EXPECT_DOUBLE_EQ(s1.stats[0], 0.5 * ((10 + 2 * 3) + (20 + 3 * 3)));
  EXPECT_DOUBLE_EQ(s1.stats[1], 20 + 3 * 2);
  EXPECT_EQ(flat(s1.paths.trajectory(0)), (std::vector<double>{0, 1}));
  EXPECT_EQ(s1.frozen_slot, 1u);
}

TEST(Ppg, KernelLeavesSmoothingLawInvariant) {
  const DiscreteHmm hmm = small_hmm();
  const std::vector<std::vector<double>> records{{0, 1, 1}, {0, 1, 1}, {1, 0}};
  for (std::size_t big_n : {1u, 2u, 3u}) {
    const auto& obs = records[big_n - 1];
    const auto target = support::smoothing_path_law(hmm, obs, obs.size() - 1);
    support::PathLaw pushed;
    for (const auto& [zeta, p] : target) {
      for (const auto& [next, q] : support::ppg_kernel_law(hmm, obs, zeta, big_n)) pushed[next] += p * q;
    }
    EXPECT_LT(support::max_abs_difference(pushed, target), 1e-11) << "N = " << big_n;
  }
}

TEST(Ppg, SweepMatchesEnumeratedKernel) {
  const DiscreteHmm hmm = small_hmm();
  const std::vector<double> obs{0, 1, 1};
  const auto model = as_feynman_kac(hmm, obs);
  const auto f = one_lag_functional(hmm, 2);
  const std::vector<double> zeta{1, 0, 1};
  const auto law = support::ppg_kernel_law(hmm, obs, zeta, 2);
  std::map<std::vector<double>, std::size_t> counts;
  Rng rng(31);
  for (int i = 0; i < 60000; ++i) ++counts[flat(ppg_sweep(model, f, 2, Trajectory::scalar(zeta), {}, rng).new_zeta)];
  std::vector<std::size_t> c;
  std::vector<double> p;
  for (const auto& [path, prob] : law) {
    c.push_back(counts[path]);
    p.push_back(prob);
  }
  EXPECT_GT(support::chi_square_p_value(c, p), 1e-3);
}

TEST(Ppg, RolloutEstimate) {
  const std::vector<double> xs{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(rollout_estimate(xs, 0), 2.5);
  EXPECT_DOUBLE_EQ(rollout_estimate(xs, 2), 3.5);
  EXPECT_DOUBLE_EQ(rollout_estimate(xs, 3), 4.0);
  EXPECT_THROW(rollout_estimate(xs, 4), InputError);
  EXPECT_EQ(default_burn_in(5), 2u);
}

TEST(Ppg, RunRecordsEveryIteration) {
  const Lgssm p;
  Rng sim(1);
  const auto rec = simulate(p, 10, sim);
  const auto model = as_feynman_kac(p, rec.observations);
  Rng rng(2);
  const Trajectory z = default_init_path(model, 10, 20, rng);
  EXPECT_EQ(z.length(), 11u);
  const PpgRun run = run_ppg(model, one_lag_functional(10), 20, 5, 2, z, {}, rng);
  ASSERT_EQ(run.per_iteration.size(), 5u);
  EXPECT_NEAR(run.rollout, (run.per_iteration[2] + run.per_iteration[3] + run.per_iteration[4]) / 3.0, 1e-12);
  EXPECT_EQ(run.final_zeta.length(), 11u);
  EXPECT_THROW(run_ppg(model, one_lag_functional(10), 20, 2, 2, z, {}, rng), InputError);
}

TEST(Ppg, OneSweepUnbiasedFromStationaryStart) {
  const Lgssm p;
  Rng sim(4);
  const auto rec = simulate(p, 10, sim);
  const auto model = as_feynman_kac(p, rec.observations);
  const auto f = one_lag_functional(10);
  const double exact = exact_one_lag_expectation(lgssm_target_moments(p, rec.observations));
  std::vector<double> est;
  for (int r = 0; r < 600; ++r) {
    Rng rng(5000 + r);
    const Trajectory zeta = sample_target_path(p, rec.observations, rng);
    est.push_back(ppg_sweep(model, f, 5, zeta, {}, rng).estimate);
  }
  double mean = 0.0;
  for (double x : est) mean += x;
  mean /= static_cast<double>(est.size());
  double var = 0.0;
  for (double x : est) var += (x - mean) * (x - mean);
  const double se = std::sqrt(var / static_cast<double>(est.size() - 1) / static_cast<double>(est.size()));
  EXPECT_LT(std::abs(mean - exact), 4.0 * se);
}
