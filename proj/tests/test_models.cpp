#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ppg/error.hpp"
#include "ppg/models.hpp"
#include "support/stats.hpp"

using namespace ppg;

namespace {

double normal_log_pdf(double x, double mean, double sd) {
  const double d = (x - mean) / sd;
  return -0.5 * d * d - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace

TEST(Lgssm, DensitiesMatchClosedForm) {
  const Lgssm p{0.9, 0.5, 1.2, 0.4};
  const auto model = as_feynman_kac(p, {0.7, -0.2});
  const double x[] = {0.3};
  const double y[] = {-0.1};
  EXPECT_NEAR(model.log_transition_density(0, State(x), State(y)), normal_log_pdf(-0.1, 0.9 * 0.3, 0.5), 1e-12);
  EXPECT_NEAR(model.log_potential(0, State(x)), normal_log_pdf(0.7, 1.2 * 0.3, 0.4), 1e-12);
  EXPECT_NEAR(model.log_potential(1, State(x)), normal_log_pdf(-0.2, 1.2 * 0.3, 0.4), 1e-12);
  EXPECT_NEAR(model.transition_density_upper(0), 1.0 / (std::sqrt(2.0 * std::numbers::pi) * 0.5), 1e-14);
  EXPECT_FALSE(model.bounds(0).has_value());
}

TEST(Lgssm, BatchDensitiesAgree) {
  const auto model = as_feynman_kac(Lgssm{}, {0.7});
  const StateArray from(1, {-1.0, 0.0, 2.5});
  const double y[] = {0.4};
  std::vector<double> logs(3), dens(3);
  model.log_transition_densities(0, from, State(y), logs);
  model.transition_densities(0, from, State(y), dens);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_NEAR(logs[l], model.log_transition_density(0, from[l], State(y)), 1e-13);
    EXPECT_NEAR(dens[l], std::exp(logs[l]), 1e-15);
  }
}

TEST(Lgssm, Validation) {
  EXPECT_THROW((Lgssm{1.0, 0.6, 0.5, 0.3}.validate()), InputError);
  EXPECT_THROW((Lgssm{0.5, 0.0, 0.5, 0.3}.validate()), InputError);
  EXPECT_NO_THROW(Lgssm{}.validate());
}

TEST(Lgssm, SimulationHasStationaryMarginals) {
  const Lgssm p;
  Rng rng(10);
  std::vector<double> x0, z5;
  for (int r = 0; r < 5000; ++r) {
    const auto rec = simulate(p, 5, rng);
    ASSERT_EQ(rec.states.size(), 6u);
    ASSERT_EQ(rec.observations.size(), 6u);
    x0.push_back(rec.states[0]);
    z5.push_back(rec.observations[5]);
  }
  const double v = p.stationary_variance();
  EXPECT_GT(support::ks_p_value(x0, [&](double x) { return support::normal_cdf(x / std::sqrt(v)); }), 1e-3);
  const double vz = p.B * p.B * v + p.R * p.R;
  EXPECT_GT(support::ks_p_value(z5, [&](double z) { return support::normal_cdf(z / std::sqrt(vz)); }), 1e-3);
}

TEST(StochVol, PotentialMatchesClosedForm) {
  const StochVol p;
  const auto model = as_feynman_kac(p, {0.4});
  const double x[] = {0.5};
  EXPECT_NEAR(model.log_potential(0, State(x)), normal_log_pdf(0.4, 0.0, p.beta * std::exp(0.25)), 1e-12);
  const double y[] = {0.6};
  EXPECT_NEAR(model.log_transition_density(0, State(x), State(y)), normal_log_pdf(0.6, p.phi * 0.5, p.sigma), 1e-12);
}

TEST(StochVol, Validation) {
  EXPECT_THROW((StochVol{1.2, 0.1, 0.5}.validate()), InputError);
  EXPECT_THROW((StochVol{0.9, -0.1, 0.5}.validate()), InputError);
}

TEST(Discrete, ValidationRejectsBadMatrices) {
  EXPECT_THROW(DiscreteHmm::with_defaults({{0.5, 0.4}, {0.5, 0.5}}, {{1.0}, {1.0}}).validate(), InputError);
  EXPECT_THROW(DiscreteHmm::with_defaults({{1.0, 0.0}, {0.5, 0.5}}, {{1.0}, {1.0}}).validate(), InputError);
  const auto ok = DiscreteHmm::with_defaults({{0.5, 0.5}, {0.5, 0.5}}, {{0.2, 0.8}, {0.5, 0.5}});
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(ok.values, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(ok.initial, (std::vector<double>{0.5, 0.5}));
}

TEST(Discrete, BoundsFromTables) {
  const auto hmm = DiscreteHmm::with_defaults({{0.9, 0.1}, {0.3, 0.7}}, {{0.6, 0.4}, {0.2, 0.8}});
  const auto model = as_feynman_kac(hmm, {1, 0});
  const auto b = model.bounds(0);
  ASSERT_TRUE(b.has_value());
  EXPECT_DOUBLE_EQ(b->potential_lower, 0.4);
  EXPECT_DOUBLE_EQ(b->potential_upper, 0.8);
  EXPECT_DOUBLE_EQ(b->density_lower, 0.1);
  EXPECT_DOUBLE_EQ(b->density_upper, 0.9);
  EXPECT_DOUBLE_EQ(model.transition_density_upper(0), 0.9);
  EXPECT_EQ(model.symbol(1), 0u);
}

TEST(Discrete, RejectsInvalidSymbols) {
  const auto hmm = DiscreteHmm::with_defaults({{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_THROW(as_feynman_kac(hmm, {0, 2}), InputError);
  EXPECT_THROW(as_feynman_kac(hmm, {0.5}), InputError);
}

TEST(Discrete, SimulationFollowsTransition) {
  const auto hmm = DiscreteHmm::with_defaults({{0.9, 0.1}, {0.3, 0.7}}, {{0.6, 0.4}, {0.2, 0.8}});
  Rng rng(4);
  const auto rec = simulate(hmm, 40000, rng);
  std::vector<std::size_t> from0(2, 0);
  for (std::size_t m = 0; m < 40000; ++m) {
    if (rec.states[m] == 0.0) ++from0[static_cast<std::size_t>(rec.states[m + 1])];
  }
  EXPECT_GT(support::chi_square_p_value(from0, std::vector<double>{0.9, 0.1}), 1e-3);
}

TEST(ModelSpec, NamesAndFactory) {
  EXPECT_EQ(model_name(Lgssm{}), "lgssm");
  EXPECT_EQ(model_name(StochVol{}), "stochvol");
  const ModelSpec d = DiscreteHmm::with_defaults({{1.0}}, {{1.0}});
  EXPECT_EQ(model_name(d), "discrete");
  EXPECT_EQ(make_feynman_kac(ModelSpec{Lgssm{}}, {0.1})->state_dim(), 1u);
}

TEST(ObservationCsv, RoundTripsExactly) {
  Rng rng(1);
  const auto rec = simulate(Lgssm{}, 50, rng);
  std::stringstream ss;
  write_observations_csv(ss, rec.observations);
  EXPECT_EQ(ss.str().substr(0, 4), "m,z\n");
  const auto back = read_observations_csv(ss);
  EXPECT_EQ(back, rec.observations);
}

TEST(ObservationCsv, RejectsMalformedInput) {
  std::stringstream bad_header("x,y\n0,1\n");
  EXPECT_THROW(read_observations_csv(bad_header), InputError);
  std::stringstream bad_index("m,z\n1,0.5\n");
  EXPECT_THROW(read_observations_csv(bad_index), InputError);
  std::stringstream bad_value("m,z\n0,abc\n");
  EXPECT_THROW(read_observations_csv(bad_value), InputError);
  EXPECT_THROW(read_observations_csv(std::string("/nonexistent/obs.csv")), IoError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
